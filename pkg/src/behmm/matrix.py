"""Dense complex matrices over M_d.

Matrices are plain ``numpy`` complex arrays of shape ``(d, d)``. Indices are
0-based throughout. The matrix unit ``e_{hk}`` has its single 1 at row ``h``,
column ``k``.
"""
import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NotHermitian, NotProjection, ValidationError

EPS_EQ = 1e-10
PSD_FLOOR = -1e-9


def as_matrix(a, d=None, name="matrix"):
    """Coerce ``a`` to a finite square complex array, optionally of size ``d``."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"{name}: expected a non-empty square matrix, got shape {m.shape}")
    if d is not None and m.shape[0] != d:
        raise DimensionMismatch(f"{name}: expected dimension {d}, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name}: entries must be finite")
    return m


def max_norm(a):
    a = np.asarray(a)
    return float(np.abs(a).max()) if a.size else 0.0


def dagger(a):
    return np.conj(np.transpose(a))


def schur_product(a, b):
    """Entrywise (Hadamard) product of two matrices of equal dimension."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"schur_product: shapes {a.shape} and {b.shape} differ")
    return a * b


def matrix_unit(h, k, d):
    if d < 1:
        raise IndexOutOfRange(f"matrix_unit: dimension must be positive, got {d}")
    if not (0 <= h < d and 0 <= k < d):
        raise IndexOutOfRange(f"matrix_unit: index ({h}, {k}) out of range for d={d}")
    e = np.zeros((d, d), dtype=complex)
    e[h, k] = 1.0
    return e


def kron(a, b):
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def is_hermitian(a, tol=EPS_EQ):
    a = np.asarray(a)
    return max_norm(a - dagger(a)) <= tol


def min_eigenvalue(a):
    """Smallest eigenvalue of the Hermitian part of ``a``."""
    a = np.asarray(a)
    return float(np.linalg.eigvalsh((a + dagger(a)) / 2).min())


def is_psd(a, floor=PSD_FLOOR, tol=EPS_EQ):
    """True iff ``a`` is Hermitian (within ``tol``) with spectrum bounded below by ``floor``.

    Raises NotHermitian when the symmetry check fails.
    """
    if not is_hermitian(a, tol):
        raise NotHermitian(f"is_psd: matrix is not Hermitian (defect {max_norm(np.asarray(a) - dagger(a)):.3g})")
    return min_eigenvalue(a) >= floor


def as_projection(e, d=None, name="projection", tol=EPS_EQ):
    """Validate that ``e`` is an orthogonal projection and return it as an array."""
    e = as_matrix(e, d, name)
    herm = max_norm(e - dagger(e))
    idem = max_norm(e @ e - e)
    if herm > tol or idem > tol:
        raise NotProjection(f"{name}: not a projection (hermiticity defect {herm:.3g}, idempotency defect {idem:.3g})")
    return e


def complement(e):
    """The orthogonal complement ``id - e``."""
    return np.eye(e.shape[0], dtype=complex) - e


def frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a
