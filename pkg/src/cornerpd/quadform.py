"""Matrix and vector primitives for quadratic forms on discrete sets.

Matrices are plain ``numpy`` arrays; the helpers here validate them and
return read-only float64 copies.  Sign vectors and lattice vectors are
int64 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from cornerpd.errors import DimensionError, ValidationError

SYMMETRY_TOL = 1e-12

# Integer-valued data below this magnitude is handled with exact int64
# arithmetic; products and row sums cannot overflow for n <= 64, M <= 64.
_EXACT_LIMIT = 2**30


def _frozen(a):
    a.setflags(write=False)
    return a


def as_square(c, name="matrix"):
    """Validate ``c`` as a finite, non-empty square matrix (float64 copy)."""
    a = np.array(c, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise DimensionError(f"{name} must have n >= 1")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return _frozen(a)


def as_symmetric(c, symmetrize=False, name="matrix"):
    """Return ``c`` as a validated symmetric matrix.

    With ``symmetrize=False`` an asymmetry above 1e-12 is rejected; the
    returned copy is made exactly symmetric either way.
    """
    a = np.array(as_square(c, name))
    if not symmetrize:
        gap = np.max(np.abs(a - a.T))
        if gap > SYMMETRY_TOL:
            raise ValidationError(f"{name} is not symmetric (max |a_ij - a_ji| = {gap:.3g})")
    a = 0.5 * (a + a.T)
    return _frozen(a)


def is_integral(a):
    """True when every entry is an integer small enough for exact arithmetic."""
    a = np.asarray(a)
    if a.dtype.kind in "iub":
        return bool(np.all(np.abs(a) < _EXACT_LIMIT))
    return bool(np.all(a == np.round(a)) and np.all(np.abs(a) < _EXACT_LIMIT))


def as_sign_vector(x, n=None):
    """Validate a point of the symmetric binary hypercube {+1, -1}^n."""
    v = np.asarray(x)
    if v.ndim != 1:
        raise DimensionError("sign vector must be one-dimensional")
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"sign vector has length {v.shape[0]}, expected {n}")
    if not np.all((v == 1) | (v == -1)):
        raise ValidationError("sign vector entries must be exactly +1 or -1")
    return v.astype(np.int64)


def as_lattice_vector(x, m_bound, n=None):
    """Validate a point of the bounded symmetric lattice {+-1, ..., +-M}^n."""
    if int(m_bound) != m_bound or m_bound < 1:
        raise ValidationError(f"lattice bound M must be a positive integer, got {m_bound}")
    v = np.asarray(x)
    if v.ndim != 1:
        raise DimensionError("lattice vector must be one-dimensional")
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"lattice vector has length {v.shape[0]}, expected {n}")
    if not np.all(v == np.round(v)):
        raise ValidationError("lattice vector entries must be integers")
    v = v.astype(np.int64)
    if np.any(v == 0) or np.any(np.abs(v) > m_bound):
        raise ValidationError(f"lattice vector entries must lie in {{+-1, ..., +-{int(m_bound)}}}")
    return v


@dataclass(frozen=True)
class SymmetricSplit:
    """Zero-diagonal symmetric part ``e`` plus the trace of the source matrix.

    On the hypercube ``x^T C x == x^T e x + trace_offset`` for every sign
    vector ``x``, since ``x_i**2 == 1``.
    """

    e: np.ndarray
    trace_offset: float

    @property
    def n(self):
        return self.e.shape[0]


def symmetrize_zero_diag(c):
    """Split ``c`` into ``offdiag((c + c^T) / 2)`` and ``trace(c)``."""
    a = as_square(c)
    d = 0.5 * (a + a.T)
    np.fill_diagonal(d, 0.0)
    return SymmetricSplit(e=_frozen(d), trace_offset=float(np.trace(a)))


def qf_value(a, x):
    """Evaluate ``x^T a x``.

    Integer matrices with integer vectors are evaluated in int64, so the
    result is exact; otherwise float64 with a fixed summation order.
    """
    a = np.asarray(a)
    v = np.asarray(x)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {a.shape}")
    if v.ndim != 1 or v.shape[0] != a.shape[0]:
        raise DimensionError(f"vector length {v.shape} does not match matrix order {a.shape[0]}")
    if is_integral(a) and is_integral(v):
        ai = a.astype(np.int64)
        vi = v.astype(np.int64)
        return float(int(vi @ (ai @ vi)))
    a = a.astype(np.float64)
    v = v.astype(np.float64)
    return float(v @ (a @ v))


def build_toeplitz(rho):
    """Symmetric Toeplitz matrix with entry ``(i, j) = rho[|i - j|]``."""
    r = np.array(rho, dtype=np.float64).ravel()
    if r.size == 0:
        raise ValidationError("autocorrelation sequence is empty")
    if not np.all(np.isfinite(r)):
        raise ValidationError("autocorrelation sequence has non-finite entries")
    return _frozen(scipy.linalg.toeplitz(r))


def default_tol(c):
    """Verdict tolerance: 0 for integer data, else ``1e-9 * (1 + max|c_ij|)``."""
    c = np.asarray(c)
    if is_integral(c):
        return 0.0
    return 1e-9 * (1.0 + float(np.max(np.abs(c))))


def canonical_sign(x):
    """Representative of ``{x, -x}`` whose first nonzero entry is positive."""
    v = np.asarray(x)
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v
