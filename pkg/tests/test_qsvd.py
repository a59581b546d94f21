import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsqmm.errors import NumericError, ParameterError
from lsqmm.quaternion import QMatrix, Quaternion, fro_norm, mat_mul, conj_transpose, to_real_rep
from lsqmm.qsvd import (
    GROUP_SPREAD_TOL,
    RECONSTRUCTION_TOL,
    nuclear_norm,
    prox_nuclear,
    qsvd,
    singular_values,
)

from conftest import random_qmatrix


def check_decomposition(A):
    r = qsvd(A)
    m, n = A.shape
    assert fro_norm(r.reconstruct() - A) <= RECONSTRUCTION_TOL * max(1.0, fro_norm(A))
    assert fro_norm(mat_mul(conj_transpose(r.U), r.U) - QMatrix.identity(m)) <= 1e-8
    assert fro_norm(mat_mul(conj_transpose(r.V), r.V) - QMatrix.identity(n)) <= 1e-8
    assert np.all(np.diff(r.sigma) <= 0) and np.all(r.sigma >= 0)
    return r


def test_identity_singular_values():
    r = check_decomposition(QMatrix.identity(3))
    assert np.allclose(r.sigma, 1.0)


def test_scalar_singular_value_is_modulus():
    r = check_decomposition(QMatrix.from_quaternion(Quaternion(1, 1, 1, 1)))
    assert r.sigma == pytest.approx([2.0])


def test_pure_8x5_matches_real_svd_oracle(rng):
    A = random_qmatrix(rng, 8, 5, pure=True)
    r = check_decomposition(A)
    real_sv = np.linalg.svd(to_real_rep(A), compute_uv=False)
    assert np.allclose(r.sigma, real_sv[3::4], atol=1e-9)
    assert np.allclose(r.sigma, real_sv[0::4], atol=1e-9)


def test_random_decompositions(rng):
    for trial in range(100):
        m, n = rng.integers(1, 13, 2)
        check_decomposition(random_qmatrix(rng, m, n, pure=trial % 2 == 0))


def test_rank_deficient_and_tied(rng):
    u = random_qmatrix(rng, 6, 1)
    v = random_qmatrix(rng, 5, 1)
    check_decomposition(mat_mul(u, conj_transpose(v)))
    check_decomposition(QMatrix.identity(4) * 3.0)
    check_decomposition(QMatrix.zeros(3, 4))


def test_non_finite_rejected():
    planes = np.zeros((4, 2, 2))
    planes[1, 0, 0] = np.nan
    with pytest.raises(NumericError):
        qsvd(QMatrix(planes))
    with pytest.raises(NumericError):
        singular_values(QMatrix(planes))


def test_multiplicity_four(rng):
    A = random_qmatrix(rng, 7, 4)
    sv = np.linalg.svd(to_real_rep(A), compute_uv=False).reshape(-1, 4)
    assert np.all(sv.max(axis=1) - sv.min(axis=1) <= 1e-8 * (1 + sv.max()))
    assert GROUP_SPREAD_TOL <= 1e-8


def test_singular_values_examples(rng):
    assert np.array_equal(singular_values(QMatrix.zeros(3, 2)), np.zeros(2))
    # rank one u v* with unit vectors -> (1, 0, ...)
    u = random_qmatrix(rng, 5, 1)
    v = random_qmatrix(rng, 4, 1)
    u, v = u / fro_norm(u), v / fro_norm(v)
    sv = singular_values(mat_mul(u, conj_transpose(v)))
    assert sv[0] == pytest.approx(1.0, rel=1e-12)
    assert np.all(sv[1:] < 1e-12)
    assert np.allclose(sv, qsvd(mat_mul(u, conj_transpose(v))).sigma, atol=1e-12)
    A = random_qmatrix(rng, 4, 6)
    assert np.allclose(singular_values(-2.5 * A), 2.5 * singular_values(A), rtol=1e-12)


def test_nuclear_norm_examples(rng):
    assert nuclear_norm(QMatrix.identity(5)) == pytest.approx(5.0)
    q = Quaternion(0.3, -1.0, 2.0, 0.5)
    assert nuclear_norm(QMatrix.from_quaternion(q)) == pytest.approx(q.modulus())
    A = random_qmatrix(rng, 6, 4)
    assert nuclear_norm(A) >= singular_values(A).max()
    real_nuc = np.linalg.svd(to_real_rep(A), compute_uv=False).sum()
    assert nuclear_norm(A) == pytest.approx(real_nuc / 4, rel=1e-10)


def test_nuclear_norm_triangle(rng):
    for _ in range(30):
        m, n = rng.integers(1, 9, 2)
        A, B = random_qmatrix(rng, m, n), random_qmatrix(rng, m, n)
        assert nuclear_norm(A + B) <= nuclear_norm(A) + nuclear_norm(B) + 1e-9


def prox_objective(Z, A, tau):
    return tau * nuclear_norm(Z) + 0.5 * fro_norm(Z - A) ** 2


def test_prox_full_shrinkage(rng):
    A = random_qmatrix(rng, 5, 3)
    assert fro_norm(prox_nuclear(A, singular_values(A).max() + 1e-9)) == 0.0


def test_prox_scalar_closed_form():
    # oracle: minimise tau*|z| + 0.5*(z - 2)^2 along the i axis on a fine grid
    z = np.linspace(0, 3, 300001)
    z_best = z[np.argmin(0.5 * z * z - 2 * z + 0.5 * 4 + 0.5 * z)]
    assert z_best == pytest.approx(1.5, abs=1e-5)
    out = prox_nuclear(QMatrix.from_parts(a1=[[2.0]]), 0.5)
    assert out.entry(0, 0).as_array() == pytest.approx([0.0, 1.5, 0.0, 0.0], abs=1e-12)


def test_prox_scalar_random(rng):
    for _ in range(50):
        a = rng.standard_normal(4)
        tau = rng.uniform(0.05, 2.0)
        expected = a * max(0.0, 1 - tau / np.linalg.norm(a))
        out = prox_nuclear(QMatrix(a.reshape(4, 1, 1)), tau).planes.ravel()
        assert np.allclose(out, expected, atol=1e-10)


def test_prox_beats_perturbations(rng):
    A = random_qmatrix(rng, 8, 6)
    tau = 0.3
    Z = prox_nuclear(A, tau)
    best = prox_objective(Z, A, tau)
    assert best < prox_objective(A, A, tau)
    for _ in range(1000):
        d = rng.standard_normal((4, 8, 6))
        d *= 1e-2 / np.linalg.norm(d)
        assert best < prox_objective(QMatrix(Z.planes + d), A, tau)


def test_prox_matches_qsvd_route(rng):
    for _ in range(20):
        m, n = rng.integers(1, 9, 2)
        A = random_qmatrix(rng, m, n)
        tau = rng.uniform(0.1, 1.5)
        r = qsvd(A)
        k = len(r.sigma)
        sig = np.zeros((4, m, n))
        sig[0, np.arange(k), np.arange(k)] = np.maximum(r.sigma - tau, 0)
        via_qsvd = mat_mul(mat_mul(r.U, QMatrix(sig)), conj_transpose(r.V))
        assert fro_norm(via_qsvd - prox_nuclear(A, tau)) <= 1e-8 * max(1.0, fro_norm(A))


def test_prox_rejects_nonpositive_tau(rng):
    with pytest.raises(ParameterError):
        prox_nuclear(random_qmatrix(rng, 2, 2), 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.floats(0.1, 10.0), st.floats(0.01, 2.0),
       st.integers(0, 2**32 - 1))
def test_prox_scaling_property(m, n, c, tau, seed):
    A = random_qmatrix(np.random.default_rng(seed), m, n)
    lhs = prox_nuclear(A * c, c * tau)
    rhs = prox_nuclear(A, tau) * c
    assert fro_norm(lhs - rhs) <= 1e-9 * max(1.0, fro_norm(rhs))
