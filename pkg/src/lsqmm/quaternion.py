"""Quaternion scalars and matrices stored as four real planes.

A quaternion matrix ``A = A0 + A1 i + A2 j + A3 k`` is held as one float64
array of shape ``(4, m, n)``; every operation below works plane-wise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericError


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        return qmul(self, other)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def modulus(self) -> float:
        return math.hypot(self.w, self.x, self.y, self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=np.float64)


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def qmul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product ``a * b``."""
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


class QMatrix:
    """Immutable m x n quaternion matrix.

    ``planes[0]`` is the real part, ``planes[1:]`` the i, j, k parts.
    """

    __slots__ = ("_planes",)

    def __init__(self, planes):
        arr = np.array(planes, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] != 4:
            raise DimensionError(f"expected planes of shape (4, m, n), got {arr.shape}")
        if arr.shape[1] < 1 or arr.shape[2] < 1:
            raise DimensionError(f"empty quaternion matrix {arr.shape[1:]}")
        arr.setflags(write=False)
        self._planes = arr

    @classmethod
    def from_parts(cls, a0=None, a1=None, a2=None, a3=None) -> "QMatrix":
        parts = [a0, a1, a2, a3]
        shape = next((np.shape(p) for p in parts if p is not None), None)
        if shape is None:
            raise DimensionError("at least one plane is required")
        shape = tuple(np.atleast_2d(np.zeros(shape)).shape)
        stacked = []
        for p in parts:
            p = np.zeros(shape) if p is None else np.atleast_2d(np.asarray(p, dtype=np.float64))
            if p.shape != shape:
                raise DimensionError(f"plane shapes differ: {p.shape} vs {shape}")
            stacked.append(p)
        return cls(np.stack(stacked))

    @classmethod
    def zeros(cls, m: int, n: int) -> "QMatrix":
        return cls(np.zeros((4, m, n)))

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls.from_parts(np.eye(n))

    @classmethod
    def from_quaternion(cls, q: Quaternion) -> "QMatrix":
        return cls(q.as_array().reshape(4, 1, 1))

    @property
    def planes(self) -> np.ndarray:
        return self._planes

    @property
    def shape(self) -> tuple[int, int]:
        return self._planes.shape[1], self._planes.shape[2]

    @property
    def rows(self) -> int:
        return self._planes.shape[1]

    @property
    def cols(self) -> int:
        return self._planes.shape[2]

    def entry(self, i: int, j: int) -> Quaternion:
        return Quaternion(*(float(v) for v in self._planes[:, i, j]))

    def is_pure(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self._planes[0]) <= atol))

    def __add__(self, other: "QMatrix") -> "QMatrix":
        return mat_add(self, other)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        _check_same_shape(self, other)
        return QMatrix(self._planes - other._planes)

    def __neg__(self) -> "QMatrix":
        return QMatrix(-self._planes)

    def __mul__(self, c) -> "QMatrix":
        return QMatrix(float(c) * self._planes)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "QMatrix":
        return QMatrix(self._planes / float(c))

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        return mat_mul(self, other)

    @property
    def H(self) -> "QMatrix":
        return conj_transpose(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._planes, other._planes))

    __hash__ = None

    def __repr__(self) -> str:
        m, n = self.shape
        return f"QMatrix({m}x{n})"


def _check_same_shape(a: QMatrix, b: QMatrix) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def mat_add(a: QMatrix, b: QMatrix) -> QMatrix:
    _check_same_shape(a, b)
    return QMatrix(a.planes + b.planes)


def mat_mul(a: QMatrix, c: QMatrix) -> QMatrix:
    """Quaternion matrix product via the four-term plane formula."""
    if a.cols != c.rows:
        raise DimensionError(f"inner dimensions differ: {a.shape} @ {c.shape}")
    a0, a1, a2, a3 = a.planes
    c0, c1, c2, c3 = c.planes
    return QMatrix(
        np.stack(
            [
                a0 @ c0 - a1 @ c1 - a2 @ c2 - a3 @ c3,
                a0 @ c1 + a1 @ c0 + a2 @ c3 - a3 @ c2,
                a0 @ c2 - a1 @ c3 + a2 @ c0 + a3 @ c1,
                a0 @ c3 + a1 @ c2 - a2 @ c1 + a3 @ c0,
            ]
        )
    )


_CONJ_SIGNS = np.array([1.0, -1.0, -1.0, -1.0]).reshape(4, 1, 1)


def conj_transpose(a: QMatrix) -> QMatrix:
    return QMatrix(_CONJ_SIGNS * a.planes.transpose(0, 2, 1))


def real_inner(x: QMatrix, y: QMatrix) -> float:
    """Real part of ``Tr(X* Y)``: the sum of plane-wise products."""
    _check_same_shape(x, y)
    return float(np.vdot(x.planes, y.planes))


def fro_norm(x: QMatrix) -> float:
    return float(np.linalg.norm(x.planes.ravel()))


# Block pattern of the real representation: entry (r, c) is sign * plane.
_PSI_LAYOUT = (
    ((0, 1), (1, -1), (2, -1), (3, -1)),
    ((1, 1), (0, 1), (3, -1), (2, 1)),
    ((2, 1), (3, 1), (0, 1), (1, -1)),
    ((3, 1), (2, -1), (1, 1), (0, 1)),
)


def to_real_rep(a: QMatrix) -> np.ndarray:
    """4m x 4n real matrix whose products mirror quaternion products."""
    m, n = a.shape
    out = np.empty((4 * m, 4 * n))
    for r, row in enumerate(_PSI_LAYOUT):
        for c, (plane, sign) in enumerate(row):
            out[r * m : (r + 1) * m, c * n : (c + 1) * n] = sign * a.planes[plane]
    return out


def from_real_rep(mat) -> QMatrix:
    """Orthogonal projection of a real 4m x 4n matrix back onto quaternion planes.

    Each plane appears in four blocks (with signs); averaging them is exact on
    the image of :func:`to_real_rep` and least-squares otherwise.
    """
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] % 4 or mat.shape[1] % 4 or 0 in mat.shape:
        raise DimensionError(f"real representation must be 4m x 4n, got {mat.shape}")
    m, n = mat.shape[0] // 4, mat.shape[1] // 4
    planes = np.zeros((4, m, n))
    for r, row in enumerate(_PSI_LAYOUT):
        for c, (plane, sign) in enumerate(row):
            planes[plane] += sign * mat[r * m : (r + 1) * m, c * n : (c + 1) * n]
    return QMatrix(planes / 4.0)


def check_finite(a: QMatrix) -> None:
    if not np.all(np.isfinite(a.planes)):
        raise NumericError("quaternion matrix contains non-finite entries")
