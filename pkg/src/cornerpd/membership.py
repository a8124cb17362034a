"""Membership of autocorrelation sequences in the +-1 class and its lattice analog.

At order ``N`` the Toeplitz matrix ``R`` of a +-1 process autocorrelation
lies in the convex hull of sign outer products ``e e^T``.  The test solves
that feasibility problem as a linear program and always returns a
certificate:

* a decomposition ``R = sum_k w_k v_k v_k^T`` with ``w_k >= 0``, or
* a separating matrix ``X`` with ``v^T X v >= 0`` on every point of the
  discrete set and ``trace(R X) < 0``.

The LP is a phase-1 program (minimize total slack).  Its optimal duals are
bounded by the unit slack costs and give the separating matrix directly
when the optimum is positive.  Both certificates are re-checked
independently before they are returned: decompositions by their entrywise
residual, witnesses by exhaustive enumeration in exact integer arithmetic.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from cornerpd.errors import CapacityError, CertificateError, DimensionError, ValidationError
from cornerpd.quadform import build_toeplitz
from cornerpd.search import (
    HYPERCUBE_CAP,
    LATTICE_CAP,
    enumerate_hypercube_min,
    enumerate_lattice_min,
    hypercube_representatives,
    lattice_representatives,
    multistart,
)

UNIT_ORDER_CAP = 16
FULL_ORDER_MAX = 10
LATTICE_COLUMN_CAP = 2**16
RESIDUAL_TOL = 1e-8
SEPARATION_TOL = 1e-8
CLAMP_TOL = 1e-9
_FEAS_TOL = 1e-9
_PRICE_TOL = 1e-10
_WITNESS_BITS = 30
_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def lattice_rho0(m_bound):
    """Second moment ``(M+1)(2M+1)/6`` of the uniform law on {+-1, ..., +-M}."""
    m = int(m_bound)
    return (m + 1) * (2 * m + 1) / 6.0


@dataclass(frozen=True)
class AcfSequence:
    """Autocorrelation lags ``rho[0..L]`` for the unit class (M = 1) or lattice class M.

    Construction checks the lag-0 normalization and the Cauchy-Schwarz bound
    ``|rho[k]| <= rho[0]``; overshoots up to 1e-9 (relative) are clamped
    with a warning.
    """

    rho: np.ndarray
    m_bound: int = 1

    def __post_init__(self):
        m = self.m_bound
        if int(m) != m or m < 1:
            raise ValidationError(f"lattice bound M must be a positive integer, got {m}")
        r = np.array(self.rho, dtype=np.float64).ravel()
        if r.size == 0:
            raise ValidationError("autocorrelation sequence is empty")
        if not np.all(np.isfinite(r)):
            raise ValidationError("autocorrelation sequence has non-finite entries")
        want = lattice_rho0(m)
        if abs(r[0] - want) > 1e-12 * max(1.0, want):
            if m == 1:
                raise ValidationError(f"rho[0] must equal 1 for a +-1 process, got {float(r[0])!r}")
            raise ValidationError(
                f"rho[0] must equal (M+1)(2M+1)/6 = {want!r} for M = {m}, got {float(r[0])!r}"
            )
        r[0] = want
        over = np.abs(r[1:]) - want
        if np.any(over > CLAMP_TOL * want):
            k = int(np.argmax(over)) + 1
            raise ValidationError(f"|rho[{k}]| = {float(abs(r[k]))!r} exceeds rho[0] = {want!r}")
        if np.any(over > 0):
            warnings.warn("autocorrelation marginally above rho[0]; clamped", stacklevel=3)
            r[1:] = np.clip(r[1:], -want, want)
        r.setflags(write=False)
        object.__setattr__(self, "rho", r)
        object.__setattr__(self, "m_bound", int(m))

    @property
    def order(self):
        return self.rho.size

    def toeplitz(self):
        return build_toeplitz(self.rho)

    def truncate(self, order):
        return AcfSequence(self.rho[:order], self.m_bound)


class Membership(str, enum.Enum):
    MEMBER_UP_TO_ORDER_N = "MEMBER_UP_TO_ORDER_N"
    NON_MEMBER = "NON_MEMBER"


@dataclass(frozen=True)
class MembershipVerdict:
    """Order-qualified verdict with exactly one certificate attached.

    ``decomposition`` is a tuple of ``(weight, vector)`` pairs for members;
    ``witness`` a symmetric matrix for non-members, with ``trace_value``
    equal to ``trace(R @ witness)``.
    """

    verdict: Membership
    order: int
    m_bound: int
    method: str
    decomposition: tuple | None = None
    residual: float | None = None
    weight_sum: float | None = None
    witness: np.ndarray | None = None
    trace_value: float | None = None
    iterations: int = 1

    @property
    def member(self):
        return self.verdict is Membership.MEMBER_UP_TO_ORDER_N


class DecompositionCheck(NamedTuple):
    residual: float
    weight_sum: float


class WitnessCheck(NamedTuple):
    is_positive_on_set: bool
    trace_value: float
    min_value: float


def _as_acf(acf, m_bound=1):
    if isinstance(acf, AcfSequence):
        return acf
    return AcfSequence(np.asarray(acf, dtype=np.float64), m_bound)


def _as_R(r):
    if isinstance(r, AcfSequence):
        return r.toeplitz()
    a = np.asarray(r, dtype=np.float64)
    if a.ndim == 1:
        return build_toeplitz(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"R must be square, got shape {a.shape}")
    return a


# -- certificate checks -------------------------------------------------------


def verify_decomposition(r, decomposition):
    """Max entrywise gap between ``R`` and ``sum w v v^T``, plus ``sum w``."""
    R = _as_R(r)
    acc = np.zeros_like(R)
    total = 0.0
    for w, v in decomposition:
        if w < 0:
            raise ValidationError("decomposition weights must be non-negative")
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (R.shape[0],):
            raise DimensionError("decomposition vector length does not match R")
        acc += w * np.outer(v, v)
        total += w
    return DecompositionCheck(float(np.max(np.abs(R - acc))), float(total))


def verify_witness(r, x, m_bound=1, cap=None):
    """Check ``v^T x v >= 0`` on the whole set by enumeration and report ``trace(R x)``.

    A separating witness has ``is_positive_on_set`` true and a negative
    trace value.
    """
    R = _as_R(r)
    X = np.asarray(x, dtype=np.float64)
    if X.shape != R.shape:
        raise DimensionError(f"witness shape {X.shape} does not match R {R.shape}")
    X = 0.5 * (X + X.T)
    if int(m_bound) == 1:
        res = enumerate_hypercube_min(X, cap=cap or HYPERCUBE_CAP)
    else:
        res = enumerate_lattice_min(X, m_bound, cap=cap or LATTICE_CAP)
    return WitnessCheck(bool(res.min_value >= 0), float(np.sum(R * X)), float(res.min_value))


def mcmillan_trace_check(acf, x):
    """``trace(R x)`` for the Toeplitz matrix of ``acf``; no positivity assumed."""
    R = _as_R(acf)
    X = np.asarray(x, dtype=np.float64)
    if X.shape != R.shape:
        raise DimensionError(f"matrix shape {X.shape} does not match order {R.shape[0]}")
    return float(np.sum(R * X.T))


def toeplitz_is_psd(acf, tol=1e-8):
    """Necessary condition for membership: the Toeplitz matrix is PSD."""
    return bool(np.linalg.eigvalsh(_as_R(acf)).min() >= -tol)


# -- LP plumbing --------------------------------------------------------------


class _Rows:
    """Constraint rows: off-diagonal pairs, then either one weight-sum row
    (unit class) or one row per diagonal entry (lattice class)."""

    def __init__(self, order, lattice):
        self.order = order
        self.lattice = lattice
        self.iu, self.ju = np.triu_indices(order, k=1)

    def features(self, V):
        V = V.astype(np.float64)
        off = V[:, self.iu] * V[:, self.ju]
        if self.lattice:
            extra = V * V
        else:
            extra = np.ones((V.shape[0], 1))
        return np.concatenate([off, extra], axis=1).T

    def rhs(self, R):
        off = R[self.iu, self.ju]
        if self.lattice:
            extra = np.diag(R)
        else:
            extra = np.array([R[0, 0]])
        return np.concatenate([off, extra])

    def dual_matrix(self, y):
        """Matrix ``Y`` with ``v^T Y v == a_v . y`` for every column ``a_v``."""
        n = self.order
        Y = np.zeros((n, n))
        k = self.iu.size
        Y[self.iu, self.ju] = 0.5 * y[:k]
        Y[self.ju, self.iu] = 0.5 * y[:k]
        if self.lattice:
            Y[np.diag_indices(n)] = y[k:]
        else:
            Y[np.diag_indices(n)] = y[k] / n
        return Y


def _phase1(A, b):
    """min sum(s+ + s-) s.t. A w + s+ - s- = b, all variables >= 0."""
    r, k = A.shape
    eye = np.eye(r)
    A_eq = np.hstack([A, eye, -eye])
    cost = np.concatenate([np.zeros(k), np.ones(2 * r)])
    res = linprog(cost, A_eq=A_eq, b_eq=b, bounds=(0, None), method="highs-ds", options=_HIGHS)
    if res.status != 0:
        raise CertificateError(f"LP solver failed: {res.message}")
    return float(res.fun), res.x[:k], np.asarray(res.eqlin.marginals, dtype=np.float64)


def _decompose(A, b, weights, V, R):
    """Polish the LP weights and keep the variant with the smallest residual."""
    support = np.flatnonzero(weights > 1e-13)
    cands = [weights[support]]
    if support.size:
        sol, *_ = np.linalg.lstsq(A[:, support], b, rcond=None)
        if np.all(sol >= 0):
            cands.append(sol)
        for w in list(cands):
            snapped = np.array([float(Fraction(float(v)).limit_denominator(1 << 20)) for v in w])
            cands.append(snapped)
    best = None
    for w in cands:
        keep = w > 0
        dec = tuple((float(wi), V[j].copy()) for wi, j, ok in zip(w, support, keep) if ok)
        chk = verify_decomposition(R, dec)
        if best is None or chk.residual <= best[1].residual:
            best = (dec, chk)
    return best


def _witness(rows, y, R, m_bound, cap):
    """Turn LP duals into an exactly verified separating matrix, or None.

    The matrix is rounded onto a dyadic grid so that enumeration over the
    set is exact in float64, then its diagonal is raised by the smallest
    integer step that makes the minimum non-negative.
    """
    X = -rows.dual_matrix(y)
    scale = float(1 << _WITNESS_BITS)
    Xi = np.round(X * scale)
    chk = verify_witness(R, Xi, m_bound, cap)
    if chk.min_value < 0:
        n = R.shape[0]
        Xi[np.diag_indices(n)] += math.ceil(-chk.min_value / n)
    Xw = Xi / scale
    chk = verify_witness(R, Xw, m_bound, cap)
    if not chk.is_positive_on_set or chk.trace_value > -SEPARATION_TOL:
        return None
    return Xw, chk.trace_value


def _conclude(obj, w, y, A, b, V, R, rows, m_bound, method, iterations, cap):
    dec = None
    if obj <= _FEAS_TOL * (1.0 + np.abs(b).sum()):
        dec = _decompose(A, b, w, V, R)
        if dec[1].residual <= RESIDUAL_TOL:
            return MembershipVerdict(
                Membership.MEMBER_UP_TO_ORDER_N,
                R.shape[0],
                m_bound,
                method,
                decomposition=dec[0],
                residual=dec[1].residual,
                weight_sum=dec[1].weight_sum,
                iterations=iterations,
            )
    wit = _witness(rows, y, R, m_bound, cap)
    if wit is not None:
        return MembershipVerdict(
            Membership.NON_MEMBER,
            R.shape[0],
            m_bound,
            method,
            witness=wit[0],
            trace_value=wit[1],
            iterations=iterations,
        )
    if dec is None:
        dec = _decompose(A, b, w, V, R)
    raise CertificateError(
        f"neither certificate verified (phase-1 objective {obj:.3g}, "
        f"best residual {dec[1].residual:.3g}); input is too close to the boundary"
    )


def _full(acf, rows, reps, method, cap):
    R = acf.toeplitz()
    A = rows.features(reps)
    b = rows.rhs(R)
    obj, w, y = _phase1(A, b)
    return _conclude(obj, w, y, A, b, reps, R, rows, acf.m_bound, method, 1, cap)


def _colgen(acf, seed, starts, max_iter):
    """Column generation over sign vectors.

    Pricing maximizes ``v^T Y v`` over the hypercube: serial stable-state
    search from several random starts first, exact enumeration when the
    heuristic finds no improving column.
    """
    R = acf.toeplitz()
    n = acf.order
    rows = _Rows(n, lattice=False)
    b = rows.rhs(R)
    cols = {tuple(np.ones(n, dtype=np.int64))}
    alt = np.where(np.arange(n) % 2 == 0, 1, -1)
    cols.add(tuple(alt))
    for it in range(1, max_iter + 1):
        V = np.array(sorted(cols, reverse=True), dtype=np.int64)
        A = rows.features(V)
        obj, w, y = _phase1(A, b)
        Y = rows.dual_matrix(y)
        E = np.array(Y)
        np.fill_diagonal(E, 0.0)
        offset = float(np.trace(Y))
        new = set()
        if n >= 2 and np.any(E != 0):
            _, runs = multistart(E, starts, seed=seed + it, stable=True)
            for r in runs:
                if r.best_value + offset > _PRICE_TOL:
                    p = r.best_point if r.best_point[0] > 0 else -r.best_point
                    new.add(tuple(int(v) for v in p))
        new -= cols
        if not new:
            exact = enumerate_hypercube_min(-E, cap=HYPERCUBE_CAP)
            if -exact.min_value + offset > _PRICE_TOL:
                new = {tuple(int(v) for v in row) for row in exact.argmin_set} - cols
        if not new:
            return _conclude(obj, w, y, A, b, V, R, rows, 1, "colgen", it, HYPERCUBE_CAP)
        cols |= new
    raise CertificateError(f"column generation did not converge in {max_iter} iterations")


def mcmillan_test(acf, method="auto", order_cap=UNIT_ORDER_CAP, seed=0, starts=8, max_iter=500):
    """Decide whether ``acf`` passes the +-1 class condition at order ``N = len(rho)``.

    ``method`` is ``"full"`` (all 2^(N-1) sign columns), ``"colgen"`` or
    ``"auto"`` (full up to N = 10).  NON_MEMBER is conclusive for the whole
    class; MEMBER_UP_TO_ORDER_N certifies only orders ``<= N``.
    """
    acf = _as_acf(acf, 1)
    if acf.m_bound != 1:
        raise ValidationError("mcmillan_test expects a unit-class sequence (M = 1)")
    n = acf.order
    if n > order_cap:
        raise CapacityError(f"order N = {n} exceeds the cap {order_cap}")
    if method == "auto":
        method = "full" if n <= FULL_ORDER_MAX else "colgen"
    if method == "full":
        return _full(acf, _Rows(n, lattice=False), hypercube_representatives(n), "full", HYPERCUBE_CAP)
    if method == "colgen":
        return _colgen(acf, seed, starts, max_iter)
    raise ValidationError(f"unknown method {method!r}")


def lattice_membership_test(acf, m_bound=None, column_cap=LATTICE_COLUMN_CAP):
    """Lattice analog of :func:`mcmillan_test` over outer products of {+-1..+-M}^N.

    Every Toeplitz entry, diagonal included, must be matched; no weight-sum
    row is imposed.  With ``M = 1`` the diagonal rows coincide and the test
    reduces to the unit-class one.
    """
    if not isinstance(acf, AcfSequence):
        if m_bound is None:
            raise ValidationError("m_bound is required for a raw sequence")
        acf = AcfSequence(np.asarray(acf, dtype=np.float64), m_bound)
    elif m_bound is not None and int(m_bound) != acf.m_bound:
        raise ValidationError("m_bound disagrees with the sequence's class")
    m, n = acf.m_bound, acf.order
    if m == 1:
        if n > UNIT_ORDER_CAP:
            raise CapacityError(f"order N = {n} exceeds the cap {UNIT_ORDER_CAP}")
        return _full(acf, _Rows(n, lattice=False), hypercube_representatives(n), "full", HYPERCUBE_CAP)
    total = m * (2 * m) ** (n - 1)
    if total > column_cap:
        raise CapacityError(f"{total} lattice columns exceed the cap {column_cap}")
    return _full(acf, _Rows(n, lattice=True), lattice_representatives(n, m), "full", LATTICE_CAP)
