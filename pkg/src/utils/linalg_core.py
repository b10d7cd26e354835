"""
Dense Complex Linear Algebra
Complex-symmetric matrices, LU with partial pivoting, unconjugated contractions
"""

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from src.utils.errors import DimensionMismatch, SingularMatrix

PIVOT_RTOL = 1e-14

SYMMETRIC = "symmetric"
GENERAL = "general"

ArrayLike = Union[np.ndarray, Iterable]


def as_vector(values: ArrayLike) -> np.ndarray:
    """
    Build a read-only complex vector

    Args:
        values: Sequence of numbers (real or complex)

    Returns:
        1-D complex ndarray of length n >= 1
    """
    vec = np.array(values, dtype=complex).reshape(-1)
    if vec.size == 0:
        raise DimensionMismatch("Vectors need at least one entry")
    vec.setflags(write=False)
    return vec


@dataclass(frozen=True)
class CMatrix:
    """Square complex matrix tagged as symmetric (transpose, never conjugate) or general"""

    entries: np.ndarray
    symmetry: str = GENERAL

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DimensionMismatch(f"Expected a non-empty square matrix, got shape {arr.shape}")
        if self.symmetry not in (SYMMETRIC, GENERAL):
            raise ValueError(f"Unknown symmetry tag: {self.symmetry}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def symmetric(cls, raw: ArrayLike) -> "CMatrix":
        """Store (R + R^T)/2; the result is exactly symmetric"""
        arr = np.array(raw, dtype=complex)
        return cls((arr + arr.T) / 2, SYMMETRIC)

    @classmethod
    def general(cls, raw: ArrayLike) -> "CMatrix":
        return cls(np.array(raw, dtype=complex), GENERAL)

    @classmethod
    def identity(cls, n: int) -> "CMatrix":
        return cls(np.eye(n, dtype=complex), SYMMETRIC)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def conj(self) -> "CMatrix":
        return CMatrix(np.conj(self.entries), self.symmetry)

    def apply(self, vec: ArrayLike) -> np.ndarray:
        """Matrix-vector product A·v"""
        v = as_vector(vec)
        if v.size != self.n:
            raise DimensionMismatch(f"Matrix of size {self.n} applied to vector of size {v.size}")
        return as_vector(self.entries @ v)

    def norm_inf(self) -> float:
        return max_norm_rows(self.entries)


@dataclass(frozen=True)
class LUResult:
    """Determinant and inverse of a square matrix"""

    determinant: complex
    inverse: CMatrix
    condition_estimate: float


def max_norm_rows(arr: np.ndarray) -> float:
    """Infinity norm (maximum absolute row sum)"""
    return float(np.max(np.sum(np.abs(arr), axis=1)))


def max_abs(arr: ArrayLike) -> float:
    """Largest entry modulus"""
    a = np.asarray(arr)
    return float(np.max(np.abs(a))) if a.size else 0.0


def lu_decompose(a: np.ndarray):
    """
    Doolittle LU factorization with partial (row) pivoting

    Args:
        a: (n, n) complex array

    Returns:
        Tuple (lu, perm, parity) where lu packs unit-lower L below the diagonal
        and U on and above it, perm is the row permutation and parity is +1/-1
    """
    lu = np.array(a, dtype=complex)
    n = lu.shape[0]
    perm = np.arange(n)
    parity = 1
    threshold = PIVOT_RTOL * max_norm_rows(lu)

    for k in range(n):
        # Largest pivot in the remaining column
        imax = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[imax, k]) <= threshold or lu[imax, k] == 0:
            raise SingularMatrix(
                f"Pivot modulus {abs(lu[imax, k]):.3e} below threshold {threshold:.3e} at column {k}",
                {"column": k},
            )

        if imax != k:
            lu[[k, imax]] = lu[[imax, k]]
            perm[[k, imax]] = perm[[imax, k]]
            parity = -parity

        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])

    return lu, perm, parity


def lu_solve(lu: np.ndarray, perm: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve A·X = B from a packed factorization (B may have several columns)"""
    n = lu.shape[0]
    x = np.array(rhs, dtype=complex)[perm]

    # Forward substitution with unit diagonal
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]

    # Back substitution
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]

    return x


def lu_invert(matrix: Union[CMatrix, ArrayLike]) -> LUResult:
    """
    Determinant and inverse through LU with partial pivoting

    Args:
        matrix: Square complex matrix

    Returns:
        LUResult with condition_estimate = ||A||inf * ||A^-1||inf

    Raises:
        SingularMatrix: when a pivot modulus falls below 1e-14 * ||A||inf
    """
    cm = matrix if isinstance(matrix, CMatrix) else CMatrix.general(matrix)
    a = cm.entries
    lu, perm, parity = lu_decompose(a)

    determinant = complex(parity * np.prod(np.diag(lu)))
    inv = lu_solve(lu, perm, np.eye(cm.n, dtype=complex))

    # The inverse of a symmetric matrix is symmetric
    inverse = CMatrix.symmetric(inv) if cm.symmetry == SYMMETRIC else CMatrix.general(inv)
    condition = max_norm_rows(a) * max_norm_rows(inverse.entries)
    return LUResult(determinant=determinant, inverse=inverse, condition_estimate=condition)


def contract(v: ArrayLike, w: ArrayLike) -> complex:
    """
    Bilinear pairing sum_i v_i w_i (no conjugation)

    Raises:
        DimensionMismatch: when the lengths differ
    """
    a = np.asarray(v, dtype=complex).reshape(-1)
    b = np.asarray(w, dtype=complex).reshape(-1)
    if a.size != b.size:
        raise DimensionMismatch(f"Cannot contract vectors of length {a.size} and {b.size}")
    return complex(np.sum(a * b))


def outer(v: ArrayLike, w: ArrayLike) -> np.ndarray:
    """Unconjugated outer product v w^T"""
    return np.outer(np.asarray(v, dtype=complex), np.asarray(w, dtype=complex))


def residual_to_identity(a: np.ndarray, b: np.ndarray) -> float:
    """Max-norm residual ||A·B - I||"""
    n = a.shape[0]
    return max_abs(a @ b - np.eye(n))
