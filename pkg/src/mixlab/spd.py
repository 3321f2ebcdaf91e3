"""Symmetric positive-definite 2x2 matrices: scalar type and array kernels.

The scalar :class:`SPD2` type stores the three independent entries and
validates positive-definiteness on construction.  The array helpers operate
on stacks of shape ``(..., 2, 2)`` and are closed-form (no LAPACK calls), so
they vectorize over grids and particle ensembles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

__all__ = [
    "SPD2",
    "det2x2",
    "inv2x2",
    "sym_sqrt2x2",
    "max_eig2x2",
    "validate_spd",
]


@dataclass(frozen=True)
class SPD2:
    """A symmetric positive-definite 2x2 matrix (a11, a12, a22)."""

    a11: float
    a12: float
    a22: float

    def __post_init__(self):
        if not (np.isfinite(self.a11) and np.isfinite(self.a12)
                and np.isfinite(self.a22)):
            raise GeometryError("SPD2 entries must be finite")
        if self.a11 <= 0 or self.det <= 0:
            raise GeometryError(
                f"matrix ({self.a11}, {self.a12}, {self.a22}) is not "
                "positive-definite")

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 ** 2

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])

    def inv(self) -> "SPD2":
        d = self.det
        return SPD2(self.a22 / d, -self.a12 / d, self.a11 / d)

    def sqrt(self) -> "SPD2":
        """The unique symmetric positive-definite square root."""
        m = sym_sqrt2x2(self.matrix)
        return SPD2(m[0, 0], m[0, 1], m[1, 1])

    @classmethod
    def from_matrix(cls, m, sym_tol: float = 1e-10) -> "SPD2":
        m = np.asarray(m, dtype=float)
        scale = max(1.0, float(np.max(np.abs(m))))
        if abs(m[0, 1] - m[1, 0]) > sym_tol * scale:
            raise GeometryError("matrix is not symmetric")
        return cls(float(m[0, 0]), 0.5 * float(m[0, 1] + m[1, 0]),
                   float(m[1, 1]))

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def det2x2(m: np.ndarray) -> np.ndarray:
    """Determinants of a stack of 2x2 matrices, shape (..., 2, 2) -> (...)."""
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def inv2x2(m: np.ndarray) -> np.ndarray:
    """Inverses of a stack of 2x2 matrices (closed form)."""
    d = det2x2(m)
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    return out / d[..., None, None]


def sym_sqrt2x2(m: np.ndarray) -> np.ndarray:
    """Symmetric SPD square roots of a stack of SPD 2x2 matrices.

    Uses the closed form sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A)),
    valid for symmetric positive-definite A.
    """
    m = np.asarray(m, dtype=float)
    d = det2x2(m)
    if np.any(d <= 0) or np.any(m[..., 0, 0] <= 0):
        raise GeometryError("sym_sqrt2x2 requires positive-definite input")
    s = np.sqrt(d)
    tr = m[..., 0, 0] + m[..., 1, 1]
    denom = np.sqrt(tr + 2.0 * s)
    out = m.copy()
    out[..., 0, 0] += s
    out[..., 1, 1] += s
    return out / denom[..., None, None]


def max_eig2x2(m: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of each symmetric 2x2 matrix in a stack."""
    half_tr = 0.5 * (m[..., 0, 0] + m[..., 1, 1])
    gap = np.sqrt(np.maximum(half_tr ** 2 - det2x2(m), 0.0))
    return half_tr + gap


def validate_spd(m: np.ndarray, where: str = "matrix field") -> None:
    """Raise GeometryError unless every matrix in the stack is SPD."""
    m = np.asarray(m)
    if not np.all(np.isfinite(m)):
        raise GeometryError(f"{where}: non-finite entries")
    if np.any(m[..., 0, 0] <= 0) or np.any(det2x2(m) <= 0):
        raise GeometryError(f"{where}: not positive-definite everywhere")
