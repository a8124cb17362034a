"""Positivity verdicts for quadratic forms on the hypercube and bounded lattice.

"Positive" means weakly positive: ``x^T C x >= 0`` at every point of the
set.  The exact minimum is reported as ``margin`` so callers can apply a
strict inequality themselves.  Heuristic search can only refute positivity;
certification always goes through enumeration.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from cornerpd.quadform import as_square, as_symmetric, canonical_sign, default_tol, qf_value, symmetrize_zero_diag
from cornerpd.search import (
    HYPERCUBE_CAP,
    LATTICE_CAP,
    enumerate_anti_stable,
    enumerate_hypercube_min,
    enumerate_lattice_min,
    multistart,
)


class Verdict(str, enum.Enum):
    POSITIVE = "POSITIVE"
    NOT_POSITIVE = "NOT_POSITIVE"
    UNKNOWN = "UNKNOWN"


class Method(str, enum.Enum):
    EXACT_ENUM = "EXACT_ENUM"
    THEOREM3 = "THEOREM3"
    HEURISTIC = "HEURISTIC"


@dataclass(frozen=True)
class DefinitenessVerdict:
    verdict: Verdict
    method: Method
    tol: float
    margin: float | None = None
    witness: np.ndarray | None = None
    witness_value: float | None = None
    m_bound: int = 1

    @property
    def positive(self):
        return self.verdict is Verdict.POSITIVE


def _sym(c):
    # x^T C x only sees the symmetric part of C.
    return as_symmetric(as_square(c), symmetrize=True)


def _verdict(method, tol, margin, argmin_row, a, m_bound=1):
    if margin >= -tol:
        return DefinitenessVerdict(Verdict.POSITIVE, method, tol, margin=margin, m_bound=m_bound)
    w = canonical_sign(np.asarray(argmin_row, dtype=np.int64))
    return DefinitenessVerdict(
        Verdict.NOT_POSITIVE, method, tol, margin=margin, witness=w, witness_value=qf_value(a, w), m_bound=m_bound
    )


def cpd_exact(c, cap=HYPERCUBE_CAP, tol=None):
    """Corner positive definiteness by enumerating all 2^(n-1) sign representatives."""
    a = _sym(c)
    tol = default_tol(a) if tol is None else tol
    res = enumerate_hypercube_min(a, cap=cap)
    return _verdict(Method.EXACT_ENUM, tol, res.min_value, res.argmin_set[0], a)


def cpd_theorem3(c, cap=HYPERCUBE_CAP, tol=None):
    """Corner positive definiteness checked only at the anti-stable states.

    With ``E = offdiag((C + C^T)/2)`` and ``t = trace(C)``, ``C`` is corner
    positive iff ``x^T E x >= -t`` at every ``x`` with ``x = -sign(E x)``.
    The global minimum of ``x^T E x`` is always anti-stable, which is why
    checking that finite subset suffices.
    """
    a = _sym(c)
    tol = default_tol(a) if tol is None else tol
    split = symmetrize_zero_diag(a)
    states = enumerate_anti_stable(split, cap=cap)
    xf = states.astype(np.float64)
    vals = np.einsum("ij,ij->i", xf @ split.e, xf)
    k = int(np.argmin(vals))
    margin = float(vals[k]) + split.trace_offset
    return _verdict(Method.THEOREM3, tol, margin, states[k], a)


def cpd_refute(c, starts=16, seed=None, workers=1, tol=None):
    """Search for a hypercube vertex with ``x^T C x < 0`` from ``starts`` random starts.

    Returns NOT_POSITIVE with a witness, or UNKNOWN.  Never POSITIVE.
    """
    a = _sym(c)
    tol = default_tol(a) if tol is None else tol
    split = symmetrize_zero_diag(a)
    best, _ = multistart(split, starts, seed=seed, workers=workers)
    w = canonical_sign(best.best_point)
    value = qf_value(a, w)
    if value < -tol:
        return DefinitenessVerdict(Verdict.NOT_POSITIVE, Method.HEURISTIC, tol, witness=w, witness_value=value)
    return DefinitenessVerdict(Verdict.UNKNOWN, Method.HEURISTIC, tol)


def lattice_positive_exact(b, m_bound, cap=LATTICE_CAP, tol=None):
    """Positivity of ``x^T b x`` over {+-1, ..., +-M}^n by enumeration.

    The diagonal matters here, so the full symmetric matrix is used.
    """
    a = _sym(b)
    m = int(m_bound)
    tol = default_tol(a) * m * m if tol is None else tol
    res = enumerate_lattice_min(a, m, cap=cap)
    return _verdict(Method.EXACT_ENUM, tol, res.min_value, res.argmin_set[0], a, m_bound=m)
