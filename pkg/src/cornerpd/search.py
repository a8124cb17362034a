"""Quadratic-form optimization on the hypercube and the bounded lattice.

Hypercube dynamics work on a zero-diagonal symmetric ``E``: the diagonal of
the original matrix only contributes its trace there.  Lattice dynamics work
on the full symmetric matrix, because ``x_i**2`` is no longer constant.

The anti-stable update ``x_i <- -sign((E x)_i)`` is applied serially and
leaves ``x_i`` alone when ``(E x)_i == 0``.  Every accepted change therefore
strictly lowers ``x^T E x``, which is what guarantees termination.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from cornerpd.errors import CapacityError, DimensionError, NonConvergenceError, ValidationError
from cornerpd.quadform import (
    SymmetricSplit,
    as_lattice_vector,
    as_sign_vector,
    as_symmetric,
    canonical_sign,
    is_integral,
    qf_value,
)
from cornerpd.rng import substream

HYPERCUBE_CAP = 24
LATTICE_CAP = 2**24
DEFAULT_MAX_SWEEPS = 10_000
_CHUNK = 1 << 15


@dataclass(frozen=True)
class SearchResult:
    """Outcome of one serial descent/ascent run.

    ``energy_trace`` holds the form value after each accepted move and
    ``moves`` the matching ``(index, new_value)`` pairs, so a run can be
    replayed move by move.
    """

    best_point: np.ndarray
    best_value: float
    sweeps_used: int
    initial_value: float
    energy_trace: tuple = ()
    moves: tuple = ()


@dataclass(frozen=True)
class EnumerationResult:
    """Exact minimum over a finite set; ``argmin_set`` rows are sign representatives."""

    min_value: float
    argmin_set: np.ndarray
    count_enumerated: int
    extra: dict = field(default_factory=dict, compare=False)


def as_zero_diag(e):
    """Accept a ``SymmetricSplit`` or a symmetric zero-diagonal matrix."""
    if isinstance(e, SymmetricSplit):
        return e.e
    a = as_symmetric(e, name="E")
    if np.any(np.diag(a) != 0):
        raise ValidationError("E must have an exactly zero diagonal; use symmetrize_zero_diag")
    return a


def _check_index(i, n):
    if not 0 <= i < n:
        raise DimensionError(f"index {i} out of range for n = {n}")


def flip_gain(e, x, i):
    """Change in ``x^T E x`` caused by flipping component ``i``: ``-4 x_i (E x)_i``."""
    a = as_zero_diag(e)
    v = as_sign_vector(x, a.shape[0])
    _check_index(i, a.shape[0])
    h = float(a[i] @ v.astype(np.float64))
    return -4.0 * float(v[i]) * h


def _serial_pass(a, x, direction, order, moves, trace, value):
    """One serial sweep in place on float vector ``x``; returns (changed, value)."""
    changed = False
    for i in order:
        h = float(a[i] @ x)
        if h == 0.0:
            continue
        target = direction if h > 0 else -direction
        if x[i] != target:
            value += -4.0 * x[i] * h
            x[i] = target
            changed = True
            moves.append((int(i), int(target)))
            trace.append(float(value))
    return changed, value


def _sweep_order(n, order, rng):
    if order == "ascending":
        return range(n)
    if order == "random":
        return rng.permutation(n)
    raise ValidationError(f"unknown sweep order {order!r}")


def anti_stable_sweep(e, x, order="ascending", rng=None):
    """One serial sweep of ``x_i <- -sign((E x)_i)``; returns ``(x_new, changed)``."""
    a = as_zero_diag(e)
    v = as_sign_vector(x, a.shape[0]).astype(np.float64)
    rng = substream(rng) if order == "random" else None
    changed, _ = _serial_pass(a, v, -1, _sweep_order(a.shape[0], order, rng), [], [], 0.0)
    return v.astype(np.int64), changed


def stable_sweep(e, x, order="ascending", rng=None):
    """One serial sweep of ``x_i <- sign((E x)_i)`` (Hopfield update)."""
    a = as_zero_diag(e)
    v = as_sign_vector(x, a.shape[0]).astype(np.float64)
    rng = substream(rng) if order == "random" else None
    changed, _ = _serial_pass(a, v, +1, _sweep_order(a.shape[0], order, rng), [], [], 0.0)
    return v.astype(np.int64), changed


def random_sign_vector(n, rng):
    return np.where(rng.random(n) < 0.5, 1, -1).astype(np.int64)


def _run(e, x0, seed, max_sweeps, direction, order):
    a = as_zero_diag(e)
    n = a.shape[0]
    if max_sweeps < 1:
        raise ValidationError("max_sweeps must be >= 1")
    rng = substream(seed)
    if x0 is None:
        x0 = random_sign_vector(n, rng)
    x = as_sign_vector(x0, n).astype(np.float64)
    initial = qf_value(a, x)
    value = initial
    moves, trace = [], []
    for sweep in range(1, max_sweeps + 1):
        changed, value = _serial_pass(a, x, direction, _sweep_order(n, order, rng), moves, trace, value)
        if not changed:
            point = x.astype(np.int64)
            return SearchResult(
                best_point=point,
                best_value=qf_value(a, point),
                sweeps_used=sweep,
                initial_value=initial,
                energy_trace=tuple(trace),
                moves=tuple(moves),
            )
    raise NonConvergenceError(
        f"no fixed point after {max_sweeps} sweeps", state=x.astype(np.int64), sweeps=max_sweeps
    )


def run_anti_stable(e, x0=None, seed=None, max_sweeps=DEFAULT_MAX_SWEEPS, order="ascending"):
    """Iterate anti-stable sweeps until none changes ``x``.

    The start is ``x0`` or, when omitted, a uniform sign vector drawn from
    ``seed``.  The returned point is a single-flip local minimum of
    ``x^T E x``.
    """
    return _run(e, x0, seed, max_sweeps, -1, order)


def run_stable(e, x0=None, seed=None, max_sweeps=DEFAULT_MAX_SWEEPS, order="ascending"):
    """Mirror of :func:`run_anti_stable` that climbs to a local maximum."""
    return _run(e, x0, seed, max_sweeps, +1, order)


def is_anti_stable(e, x):
    """True iff ``x_i * (E x)_i <= 0`` for every component."""
    a = as_zero_diag(e)
    v = as_sign_vector(x, a.shape[0]).astype(np.float64)
    return bool(np.all(v * (a @ v) <= 0))


def is_stable(e, x):
    """True iff ``x_i * (E x)_i >= 0`` for every component."""
    a = as_zero_diag(e)
    v = as_sign_vector(x, a.shape[0]).astype(np.float64)
    return bool(np.all(v * (a @ v) >= 0))


def _pick_best(results, maximize):
    def key(r):
        v = r.best_value
        return (-v if maximize else v, tuple(canonical_sign(r.best_point)))

    return min(results, key=key)


def multistart(e, starts, seed=None, stable=False, max_sweeps=DEFAULT_MAX_SWEEPS, workers=1):
    """Run ``starts`` independent searches; start ``k`` draws from substream ``(seed, k)``.

    Returns ``(best, results)``.  The reduction (best value, then the
    lexicographically smallest canonical point) does not depend on
    ``workers``.
    """
    if starts < 1:
        raise ValidationError("starts must be >= 1")
    a = as_zero_diag(e)
    runner = run_stable if stable else run_anti_stable

    def one(k):
        return runner(a, seed=substream(seed, k), max_sweeps=max_sweeps)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(starts)))
    else:
        results = [one(k) for k in range(starts)]
    return _pick_best(results, stable), results


# -- exhaustive oracles ------------------------------------------------------


def _tie_tol(a):
    if is_integral(a):
        return 0.0
    return 1e-12 * (1.0 + float(np.abs(a).sum()))


def hypercube_representatives(n, start=0, stop=None):
    """Rows ``start..stop`` of the 2^(n-1) sign representatives with ``x_0 = +1``.

    Row 0 is the all-ones vector; later components flip in binary order.
    """
    total = 1 << (n - 1)
    stop = total if stop is None else min(stop, total)
    r = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 2, -1, -1, dtype=np.int64)
    bits = (r[:, None] >> shifts[None, :]) & 1
    x = np.empty((r.size, n), dtype=np.int64)
    x[:, 0] = 1
    x[:, 1:] = 1 - 2 * bits
    return x


def lattice_values(m_bound):
    """Lattice coordinate values ordered by magnitude, positive first."""
    m = int(m_bound)
    return np.array([s * k for k in range(1, m + 1) for s in (1, -1)], dtype=np.int64)


def lattice_representatives(n, m_bound, start=0, stop=None):
    """Rows of the ``M (2M)^(n-1)`` lattice representatives with ``x_0 > 0``."""
    m = int(m_bound)
    vals = lattice_values(m)
    total = m * (2 * m) ** (n - 1)
    stop = total if stop is None else min(stop, total)
    r = np.arange(start, stop, dtype=np.int64)
    x = np.empty((r.size, n), dtype=np.int64)
    rest = r.copy()
    for k in range(n - 1, 0, -1):
        x[:, k] = vals[rest % (2 * m)]
        rest //= 2 * m
    x[:, 0] = rest + 1
    return x


def _forms(x, a):
    xf = x.astype(np.float64)
    return np.einsum("ij,ij->i", xf @ a, xf)


def _enumerate_min(a, total, rows):
    best = np.inf
    argmins = []
    tol = _tie_tol(a)
    for start in range(0, total, _CHUNK):
        x = rows(start, start + _CHUNK)
        vals = _forms(x, a)
        m = float(vals.min())
        if m < best - tol:
            best = m
            argmins = [x[vals <= m + tol]]
        elif m <= best + tol:
            argmins.append(x[vals <= best + tol])
    argmin = np.concatenate(argmins, axis=0)
    return EnumerationResult(min_value=best, argmin_set=argmin, count_enumerated=total)


def enumerate_hypercube_min(a, cap=HYPERCUBE_CAP):
    """Exact minimum of ``x^T a x`` over {+-1}^n, one representative per +-pair.

    ``a`` may be a zero-diagonal ``E`` (a ``SymmetricSplit`` contributes its
    ``e`` only) or any symmetric matrix.
    """
    a = a.e if isinstance(a, SymmetricSplit) else as_symmetric(a)
    n = a.shape[0]
    if n > cap:
        raise CapacityError(
            f"n = {n} exceeds the exact-enumeration cap {cap}; use multistart search instead"
        )
    return _enumerate_min(a, 1 << (n - 1), lambda s, t: hypercube_representatives(n, s, t))


def enumerate_anti_stable(e, cap=HYPERCUBE_CAP):
    """All anti-stable representatives of ``E`` as rows of an int array."""
    a = as_zero_diag(e)
    n = a.shape[0]
    if n > cap:
        raise CapacityError(f"n = {n} exceeds the exact-enumeration cap {cap}")
    tol = _tie_tol(a)
    out = []
    for start in range(0, 1 << (n - 1), _CHUNK):
        x = hypercube_representatives(n, start, start + _CHUNK)
        xf = x.astype(np.float64)
        ok = np.all(xf * (xf @ a) <= tol, axis=1)
        out.append(x[ok])
    return np.concatenate(out, axis=0)


def enumerate_lattice_min(d, m_bound, cap=LATTICE_CAP):
    """Exact minimum of ``x^T d x`` over {+-1, ..., +-M}^n (representatives with x_0 > 0)."""
    a = as_symmetric(d)
    n = a.shape[0]
    m = _check_m(m_bound)
    if (2 * m) ** n > cap:
        raise CapacityError(f"(2M)^n = {(2 * m) ** n} lattice points exceed the cap {cap}")
    total = m * (2 * m) ** (n - 1)
    return _enumerate_min(a, total, lambda s, t: lattice_representatives(n, m, s, t))


def _check_m(m_bound):
    if int(m_bound) != m_bound or m_bound < 1:
        raise ValidationError(f"lattice bound M must be a positive integer, got {m_bound}")
    return int(m_bound)


def random_lattice_vector(n, m_bound, rng):
    vals = lattice_values(m_bound)
    return vals[rng.integers(0, vals.size, size=n)]


def lattice_descent(d, m_bound, x0=None, seed=None, max_sweeps=DEFAULT_MAX_SWEEPS):
    """Serial coordinate descent of ``x^T d x`` on the bounded symmetric lattice.

    Each coordinate moves to the value minimizing the form with the others
    held fixed, and only on strict improvement; among equally good values
    the smaller magnitude wins, then the positive sign.
    """
    a = as_symmetric(d)
    n = a.shape[0]
    m = _check_m(m_bound)
    if max_sweeps < 1:
        raise ValidationError("max_sweeps must be >= 1")
    rng = substream(seed)
    if x0 is None:
        x0 = random_lattice_vector(n, m, rng)
    x = as_lattice_vector(x0, m, n).astype(np.float64)
    off = np.array(a)
    np.fill_diagonal(off, 0.0)
    diag = np.diag(a).copy()
    cand = lattice_values(m).astype(np.float64)
    initial = qf_value(a, x)
    value = initial
    moves, trace = [], []
    for sweep in range(1, max_sweeps + 1):
        changed = False
        for i in range(n):
            s = float(off[i] @ x)
            c = x[i]
            gains = diag[i] * (cand * cand - c * c) + 2.0 * (cand - c) * s
            k = int(np.argmin(gains))  # first minimizer = smallest |v|, then positive
            if gains[k] < 0:
                x[i] = cand[k]
                value += float(gains[k])
                changed = True
                moves.append((i, int(cand[k])))
                trace.append(float(value))
        if not changed:
            point = x.astype(np.int64)
            return SearchResult(
                best_point=point,
                best_value=qf_value(a, point),
                sweeps_used=sweep,
                initial_value=initial,
                energy_trace=tuple(trace),
                moves=tuple(moves),
            )
    raise NonConvergenceError(
        f"no lattice fixed point after {max_sweeps} sweeps", state=x.astype(np.int64), sweeps=max_sweeps
    )
