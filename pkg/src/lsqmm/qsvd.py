"""Quaternion SVD, nuclear norm and singular value thresholding.

Everything goes through one real SVD of the 4m x 4n real representation,
whose singular values repeat in groups of four.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .quaternion import (
    QMatrix,
    check_finite,
    conj_transpose,
    from_real_rep,
    mat_mul,
    to_real_rep,
)

RECONSTRUCTION_TOL = 1e-8
GROUP_SPREAD_TOL = 1e-9
# singular values tied within this (relative) distance share a candidate pool
_TIE_TOL = 1e-10


@dataclass(frozen=True)
class QsvdResult:
    U: QMatrix
    sigma: np.ndarray
    V: QMatrix

    def reconstruct(self) -> QMatrix:
        m, n = self.U.rows, self.V.rows
        k = len(self.sigma)
        sig = np.zeros((4, m, n))
        sig[0, np.arange(k), np.arange(k)] = self.sigma
        return mat_mul(mat_mul(self.U, QMatrix(sig)), conj_transpose(self.V))


def _real_vectors_to_q(vecs: np.ndarray, length: int) -> np.ndarray:
    """Columns of a (4*length, c) real array -> (4, length, c) quaternion planes."""
    return vecs.reshape(4, length, -1)


def _qdot(p: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Quaternion coefficients ``p* r`` for one vector p (4, L) against columns r (4, L, c)."""
    p0, p1, p2, p3 = p
    r0, r1, r2, r3 = r
    return np.stack(
        [
            p0 @ r0 + p1 @ r1 + p2 @ r2 + p3 @ r3,
            p0 @ r1 - p1 @ r0 - p2 @ r3 + p3 @ r2,
            p0 @ r2 + p1 @ r3 - p2 @ r0 - p3 @ r1,
            p0 @ r3 - p1 @ r2 + p2 @ r1 - p3 @ r0,
        ]
    )


def _qscale(p: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Outer product ``p c``: vector p (4, L) times row of quaternion scalars c (4, k)."""
    p0, p1, p2, p3 = (x[:, None] for x in p)
    c0, c1, c2, c3 = (x[None, :] for x in c)
    return np.stack(
        [
            p0 * c0 - p1 * c1 - p2 * c2 - p3 * c3,
            p0 * c1 + p1 * c0 + p2 * c3 - p3 * c2,
            p0 * c2 - p1 * c3 + p2 * c0 + p3 * c1,
            p0 * c3 + p1 * c2 - p2 * c1 + p3 * c0,
        ]
    )


def _project_out(p: np.ndarray, r: np.ndarray) -> np.ndarray:
    return r - _qscale(p, _qdot(p, r))


def _col_norms(r: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("qlc,qlc->c", r, r))


def _orthonormalize(cols: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt under the quaternion inner product (two passes)."""
    out = cols.copy()
    for j in range(out.shape[2]):
        v = out[:, :, j : j + 1]
        for _ in range(2):
            for i in range(j):
                v = _project_out(out[:, :, i], v)
        out[:, :, j] = v[:, :, 0] / _col_norms(v)[0]
    return out


def _select_basis(accepted: list[np.ndarray], pool: np.ndarray, pool_sigma: np.ndarray,
                  target: int) -> list[np.ndarray]:
    """Grow ``accepted`` to ``target`` orthonormal quaternion vectors drawn from ``pool``.

    Candidates are taken in singular-value order. Within a cluster of tied
    values the candidate with the largest residual after projecting out the
    accepted vectors wins, which avoids picking a vector whose quaternion span
    is already covered.
    """
    resid = pool.copy()
    for p in accepted:
        resid = _project_out(p, resid)
    scale = 1.0 + pool_sigma.max()
    while len(accepted) < target:
        ref = pool_sigma[min(4 * len(accepted), len(pool_sigma) - 1)]
        cluster = np.flatnonzero(np.abs(pool_sigma - ref) <= _TIE_TOL * scale)
        norms = _col_norms(resid[:, :, cluster])
        if norms.max() < 1e-6:
            # cluster exhausted; fall back to every candidate
            cluster = np.arange(pool.shape[2])
            norms = _col_norms(resid)
        best = cluster[int(np.argmax(norms))]
        p = resid[:, :, best] / norms.max()
        accepted.append(p)
        resid = _project_out(p, resid)
    return accepted


def qsvd(a: QMatrix) -> QsvdResult:
    """Full quaternion SVD ``A = U diag(sigma) V*`` with unitary U (m x m) and V (n x n)."""
    check_finite(a)
    m, n = a.shape
    k = min(m, n)
    psi = to_real_rep(a)
    ru, rs, rvt = np.linalg.svd(psi, full_matrices=True)
    sigma = rs[0::4].copy()
    smax = sigma[0] if k else 0.0

    sig_v = np.zeros(4 * n)
    sig_v[: rs.size] = rs
    v_pool = _real_vectors_to_q(rvt.T, n)
    v_cols = _select_basis([], v_pool, sig_v, n)
    v = _orthonormalize(np.stack(v_cols, axis=2))

    # left vectors for nonzero singular values follow from A v / sigma so that
    # U and V stay paired; the rest complete the basis from the real left vectors
    av = mat_mul(a, QMatrix(v[:, :, :k])).planes
    u_cols = []
    for i in range(k):
        if smax > 0 and sigma[i] > 1e-12 * smax:
            u_cols.append(av[:, :, i] / sigma[i])
        else:
            break
    if u_cols:
        u_cols = list(_orthonormalize(np.stack(u_cols, axis=2)).transpose(2, 0, 1))
    sig_u = np.zeros(4 * m)
    sig_u[: rs.size] = rs
    u_pool = _real_vectors_to_q(ru, m)
    u_cols = _select_basis(u_cols, u_pool, sig_u, m)
    u = _orthonormalize(np.stack(u_cols, axis=2))
    return QsvdResult(U=QMatrix(u), sigma=sigma, V=QMatrix(v))


def singular_values(a: QMatrix) -> np.ndarray:
    """Descending quaternion singular values (one per group of four real ones)."""
    check_finite(a)
    return np.linalg.svd(to_real_rep(a), compute_uv=False)[0::4].copy()


def nuclear_norm(a: QMatrix) -> float:
    return float(np.sum(singular_values(a)))


def svt(a: QMatrix, tau: float) -> tuple[QMatrix, np.ndarray]:
    """Singular value thresholding; returns the shrunk matrix and its singular values."""
    if not tau > 0:
        raise ParameterError(f"threshold must be positive, got {tau}")
    check_finite(a)
    ru, rs, rvt = np.linalg.svd(to_real_rep(a), full_matrices=False)
    shrunk = np.maximum(rs - tau, 0.0)
    keep = shrunk > 0
    real = (ru[:, keep] * shrunk[keep]) @ rvt[keep]
    return from_real_rep(real), shrunk[0::4].copy()


def prox_nuclear(a: QMatrix, tau: float) -> QMatrix:
    """argmin_Z tau*||Z||_* + 0.5*||Z - A||_F^2."""
    return svt(a, tau)[0]
