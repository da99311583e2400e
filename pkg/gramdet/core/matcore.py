"""Small dense real-matrix utilities.

Determinants, inverses, spectral norms, singular values and structural
predicates for the d x d matrices every score is built from. Matrices are
plain numpy float arrays; nothing here mutates its input.
"""
from enum import Enum, unique

import numpy as np

from gramdet.core.exceptions import ShapeError, SingularMatrixError

DEFAULT_TOLERANCE = 1e-9
PIVOT_TOLERANCE = 1e-14
SINGULAR_TOLERANCE = 1e-12
JACOBI_SWEEPS = 60


@unique
class PredicateKind(Enum):

    """Structural properties a matrix can be checked for."""

    COLUMN_STOCHASTIC = 'column-stochastic'
    ROW_DIAGONALLY_MAXIMAL = 'row-diagonally-maximal'
    ROW_DIAGONALLY_DOMINANT = 'row-diagonally-dominant'
    PERMUTATION = 'permutation'
    IDENTITY = 'identity'


class StructuralPredicate:

    """A structural property plus the tolerance used to test it."""

    __slots__ = ["kind", "tolerance"]

    def __init__(self, kind, tolerance=DEFAULT_TOLERANCE):
        if tolerance < 0:
            raise ValueError("Predicate tolerance must be >= 0, got {}".format(tolerance))
        self.kind = PredicateKind(kind)
        self.tolerance = float(tolerance)

    def __repr__(self):
        return '<StructuralPredicate {} tol={}>'.format(self.kind.value, self.tolerance)


def as_matrix(m):
    """Return m as a finite 2-D float array."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2:
        raise ShapeError("Expected a 2-D matrix, got shape {}".format(arr.shape))
    if not np.all(np.isfinite(arr)):
        raise ShapeError("Matrix entries must be finite")
    return arr


def _as_square(m):
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError("Expected a square matrix, got shape {}".format(arr.shape))
    return arr


def identity(n):
    """Return the n x n identity."""
    return np.eye(n)


def lu_decompose(m):
    """LU factorization with partial pivoting.

    Returns (lu, perm, sign, singular) where lu holds L (unit diagonal,
    below) and U (on and above the diagonal), perm the row order, sign the
    pivot parity, and singular whether some pivot column was numerically
    zero.
    """
    a = _as_square(m).copy()
    n = a.shape[0]
    perm = np.arange(n)
    sign = 1.0
    singular = False
    scale = np.max(np.abs(a)) if a.size else 0.0
    threshold = PIVOT_TOLERANCE * scale

    for col in range(n):
        pivot = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[pivot, col]) <= threshold:
            singular = True
            continue
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            perm[[col, pivot]] = perm[[pivot, col]]
            sign = -sign
        a[col + 1:, col] /= a[col, col]
        a[col + 1:, col + 1:] -= np.outer(a[col + 1:, col], a[col, col + 1:])

    return a, perm, sign, singular


def det(m):
    """Determinant via LU with partial pivoting."""
    arr = _as_square(m)
    if arr.shape[0] == 0:
        return 1.0
    lu, _, sign, singular = lu_decompose(arr)
    if singular:
        return 0.0
    return float(sign * np.prod(np.diag(lu)))


def is_singular(m):
    """True when |det(m)| is below the singularity threshold.

    The threshold is relative to the largest absolute entry raised to the
    matrix order, so scaled copies of a matrix agree.
    """
    arr = _as_square(m)
    n = arr.shape[0]
    scale = np.max(np.abs(arr)) if arr.size else 0.0
    if scale == 0.0:
        return n > 0
    return abs(det(arr)) <= SINGULAR_TOLERANCE * scale ** n


def inverse(m):
    """Inverse by LU forward and back substitution."""
    arr = _as_square(m)
    if is_singular(arr):
        raise SingularMatrixError("Matrix is singular to tolerance")

    lu, perm, _, _ = lu_decompose(arr)
    n = arr.shape[0]
    # solve L U X = P I column block at once
    x = np.eye(n)[perm]
    for i in range(n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


def spectral_norm(m):
    """Largest singular value.

    Read off the Jacobi singular values, which stay accurate when the top two
    singular values nearly coincide.
    """
    arr = as_matrix(m)
    if arr.size == 0 or not np.any(arr):
        return 0.0
    return float(singular_values(arr)[0])


def singular_values(m):
    """All singular values, descending, by one-sided Jacobi rotations."""
    arr = as_matrix(m)
    if arr.shape[0] < arr.shape[1]:
        arr = arr.T
    u = arr.copy()
    cols = u.shape[1]
    if cols == 0:
        return np.zeros(0)

    for _ in range(JACOBI_SWEEPS):
        rotated = False
        for i in range(cols - 1):
            for j in range(i + 1, cols):
                alpha = u[:, i] @ u[:, i]
                beta = u[:, j] @ u[:, j]
                gamma = u[:, i] @ u[:, j]
                if abs(gamma) <= 1e-15 * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                ui = u[:, i].copy()
                u[:, i] = c * ui - s * u[:, j]
                u[:, j] = s * ui + c * u[:, j]
        if not rotated:
            break

    return np.sort(np.linalg.norm(u, axis=0))[::-1]


def matches(m, predicate):
    """Check m against a StructuralPredicate."""
    kind = predicate.kind
    tol = predicate.tolerance

    if kind is PredicateKind.COLUMN_STOCHASTIC:
        arr = as_matrix(m)
        return bool(np.all(arr >= -tol) and np.all(np.abs(arr.sum(axis=0) - 1.0) <= tol))

    arr = _as_square(m)
    diag = np.diag(arr)

    if kind is PredicateKind.ROW_DIAGONALLY_MAXIMAL:
        return bool(np.all(arr <= diag[:, None] + tol))

    if kind is PredicateKind.ROW_DIAGONALLY_DOMINANT:
        off = np.abs(arr).sum(axis=1) - np.abs(diag)
        return bool(np.all(off <= np.abs(diag) + tol))

    if kind is PredicateKind.IDENTITY:
        return bool(np.all(np.abs(arr - np.eye(arr.shape[0])) <= tol))

    if kind is PredicateKind.PERMUTATION:
        ones = np.abs(arr - 1.0) <= tol
        zeros = np.abs(arr) <= tol
        if not np.all(ones | zeros):
            return False
        return bool(np.all(ones.sum(axis=0) == 1) and np.all(ones.sum(axis=1) == 1))

    raise ValueError("Unknown predicate {}".format(kind))


def check(m, kind, tolerance=DEFAULT_TOLERANCE):
    """Shorthand for matches(m, StructuralPredicate(kind, tolerance))."""
    return matches(m, StructuralPredicate(kind, tolerance))
