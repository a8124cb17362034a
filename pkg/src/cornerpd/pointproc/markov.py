"""Finite-state jump processes built from competing point processes.

A semi-Markov process alternates state-dependent sojourns with jumps of an
embedded chain.  A CTMC is the special case with exponential sojourns, and
it can be simulated three equivalent ways: competing exponential clocks
(one per allowed transition), total-rate sojourn plus embedded jump, or a
uniformized chain driven by a single Poisson clock.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.stats

from cornerpd.errors import DimensionError, ValidationError
from cornerpd.rng import substream

_BUF = 8192


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-constant path: state ``states[k]`` from ``times[k]`` on.

    ``absorbed`` is set when the path entered a state with no exits; the
    path is then constant up to ``horizon``.
    """

    times: np.ndarray
    states: np.ndarray
    horizon: float
    absorbed: bool = False

    def __post_init__(self):
        t = np.array(self.times, dtype=np.float64).ravel()
        s = np.array(self.states).ravel()
        if t.size == 0 or t.shape != s.shape:
            raise ValidationError("trajectory needs matching, non-empty times and states")
        if t[0] != 0:
            raise ValidationError("trajectory must start at time 0")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("segment enter times must be strictly increasing")
        if t[-1] > self.horizon:
            raise ValidationError("segment enter time beyond the horizon")
        if np.any(s[1:] == s[:-1]):
            raise ValidationError("consecutive segments must change state")
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def segments(self):
        return list(zip(self.times.tolist(), self.states.tolist()))

    @property
    def n_jumps(self):
        return self.times.size - 1

    def state_at(self, t):
        """State occupied at time(s) ``t`` (right-continuous)."""
        idx = np.searchsorted(self.times, t, side="right") - 1
        if np.any(idx < 0):
            raise ValidationError("time before the start of the trajectory")
        return self.states[idx]


def _path(times, states, horizon, absorbed=False):
    return Trajectory(np.asarray(times), np.asarray(states), horizon, absorbed)


class _Stream:
    """Buffered draws from one generator; keeps per-event overhead low."""

    def __init__(self, rng, kind):
        self.rng = rng
        self.kind = kind
        self.buf = np.empty(0)
        self.pos = 0
        self.chunk = 16

    def take(self, k=1):
        if self.pos + k > self.buf.size:
            # refill sizes grow geometrically so short paths stay cheap
            size = max(self.chunk, k)
            self.chunk = min(2 * self.chunk, _BUF)
            fresh = self.rng.standard_exponential(size) if self.kind == "exp" else self.rng.random(size)
            self.buf = np.concatenate([self.buf[self.pos :], fresh])
            self.pos = 0
        out = self.buf[self.pos : self.pos + k]
        self.pos += k
        return out


def as_generator(q):
    """Validate a CTMC rate matrix: off-diagonal >= 0, rows summing to 0."""
    g = np.array(q, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionError(f"generator must be square, got shape {g.shape}")
    if g.shape[0] < 2:
        raise ValidationError("generator needs at least 2 states")
    if not np.all(np.isfinite(g)):
        raise ValidationError("generator has non-finite entries")
    off = g - np.diag(np.diag(g))
    if np.any(off < 0):
        raise ValidationError("generator off-diagonal rates must be >= 0")
    if np.any(np.diag(g) > 0):
        raise ValidationError("generator diagonal must be <= 0")
    tol = 1e-12 * (1.0 + np.abs(g).max())
    if np.any(np.abs(g.sum(axis=1)) > tol):
        raise ValidationError("generator rows must sum to 0")
    g.setflags(write=False)
    return g


def as_stochastic(p, zero_diagonal=False):
    a = np.array(p, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"transition matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise ValidationError("transition probabilities must be finite and >= 0")
    if np.any(np.abs(a.sum(axis=1) - 1.0) > 1e-12):
        raise ValidationError("transition matrix rows must sum to 1")
    if zero_diagonal and np.any(np.diag(a) != 0):
        raise ValidationError("embedded chain must have a zero diagonal")
    a.setflags(write=False)
    return a


def _check_init(init, n):
    if not (0 <= int(init) < n) or int(init) != init:
        raise ValidationError(f"initial state {init!r} is not in 0..{n - 1}")
    return int(init)


def _check_horizon(horizon):
    if not (np.isfinite(horizon) and horizon > 0):
        raise ValidationError("horizon must be finite and > 0")


def _cdf_rows(p):
    c = np.cumsum(p, axis=1)
    c[:, -1] = 1.0
    return c


def _jump(cdf_row, u):
    return int(np.searchsorted(cdf_row, u, side="right"))


def semi_markov_simulate(p_embedded, sojourns, init, horizon, seed=None, max_jumps=None):
    """Semi-Markov path: sojourn drawn from ``sojourns[state]``, then an
    embedded-chain jump.  Stops at ``horizon`` or after ``max_jumps`` jumps
    (the horizon then becomes the last jump time)."""
    p = as_stochastic(p_embedded, zero_diagonal=True)
    n = p.shape[0]
    if n < 2:
        raise ValidationError("embedded chain needs at least 2 states")
    if len(sojourns) != n:
        raise DimensionError(f"{len(sojourns)} sojourn models for {n} states")
    _check_horizon(horizon)
    state = _check_init(init, n)
    rng = substream(seed)
    cdf = _cdf_rows(p)
    unif = _Stream(rng, "unif")
    times, states = [0.0], [state]
    t = 0.0
    while max_jumps is None or len(times) - 1 < max_jumps:
        t += float(sojourns[state].sample(rng, 1)[0])
        if t > horizon:
            break
        state = _jump(cdf[state], unif.take()[0])
        times.append(t)
        states.append(state)
    else:
        horizon = times[-1] if times[-1] > 0 else horizon
    return _path(times, states, horizon)


def ctmc_simulate_competing(g, init, horizon, seed=None, max_jumps=None):
    """CTMC path from competing exponential clocks.

    In state ``i`` every transition ``i -> j`` with ``q_ij > 0`` gets its own
    Exponential(q_ij) clock; the earliest one fires.
    """
    q = as_generator(g)
    n = q.shape[0]
    _check_horizon(horizon)
    state = _check_init(init, n)
    rng = substream(seed)
    targets = [np.flatnonzero((q[i] > 0) & (np.arange(n) != i)) for i in range(n)]
    rates = [q[i, targets[i]] for i in range(n)]
    expo = _Stream(rng, "exp")
    times, states = [0.0], [state]
    t = 0.0
    while max_jumps is None or len(times) - 1 < max_jumps:
        if targets[state].size == 0:
            return _path(times, states, horizon, absorbed=True)
        clocks = expo.take(targets[state].size) / rates[state]
        k = int(np.argmin(clocks))
        t += float(clocks[k])
        if t > horizon:
            break
        state = int(targets[state][k])
        times.append(t)
        states.append(state)
    else:
        horizon = times[-1] if times[-1] > 0 else horizon
    return _path(times, states, horizon)


def ctmc_simulate_embedded(g, init, horizon, seed=None, max_jumps=None):
    """CTMC path from Exponential(-q_ii) sojourns and jumps with probability q_ij / -q_ii."""
    q = as_generator(g)
    n = q.shape[0]
    _check_horizon(horizon)
    state = _check_init(init, n)
    rng = substream(seed)
    exit_rate = -np.diag(q)
    with np.errstate(invalid="ignore", divide="ignore"):
        jump_p = np.where(exit_rate[:, None] > 0, q / exit_rate[:, None], 0.0)
    np.fill_diagonal(jump_p, 0.0)
    cdf = _cdf_rows(jump_p)
    expo = _Stream(rng, "exp")
    unif = _Stream(rng, "unif")
    times, states = [0.0], [state]
    t = 0.0
    while max_jumps is None or len(times) - 1 < max_jumps:
        if exit_rate[state] == 0:
            return _path(times, states, horizon, absorbed=True)
        t += float(expo.take()[0]) / exit_rate[state]
        if t > horizon:
            break
        state = _jump(cdf[state], unif.take()[0])
        times.append(t)
        states.append(state)
    else:
        horizon = times[-1] if times[-1] > 0 else horizon
    return _path(times, states, horizon)


def uniformize(g, lambda_u=None):
    """Return ``(P, lambda_u)`` with ``P = I + Q / lambda_u``.

    ``lambda_u`` defaults to the largest exit rate and may not be smaller
    than it.  A generator with no exits gives ``(I, 0.0)``.
    """
    q = as_generator(g)
    top = float(np.max(-np.diag(q)))
    if lambda_u is None:
        lambda_u = top
    lambda_u = float(lambda_u)
    if lambda_u < top * (1 - 1e-12) or lambda_u < 0:
        raise ValidationError(f"lambda_u = {lambda_u} is below the largest exit rate {top}")
    n = q.shape[0]
    if lambda_u == 0:
        return np.eye(n), 0.0
    p = np.eye(n) + q / lambda_u
    p = np.clip(p, 0.0, None)
    return p, lambda_u


def uniformized_simulate(p, lambda_u, init, horizon, seed=None, max_jumps=None):
    """Discrete chain ``p`` observed at the ticks of a Poisson(lambda_u) clock.

    Self-transitions leave the path unchanged, so only real jumps create
    segments.  ``max_jumps`` counts real jumps.
    """
    p = as_stochastic(p)
    n = p.shape[0]
    _check_horizon(horizon)
    state = _check_init(init, n)
    if lambda_u < 0 or not np.isfinite(lambda_u):
        raise ValidationError("lambda_u must be finite and >= 0")
    if lambda_u == 0:
        return _path([0.0], [state], horizon)
    rng = substream(seed)
    cdf = _cdf_rows(p)
    expo = _Stream(rng, "exp")
    unif = _Stream(rng, "unif")
    times, states = [0.0], [state]
    t = 0.0
    while max_jumps is None or len(times) - 1 < max_jumps:
        if p[state, state] == 1.0:
            return _path(times, states, horizon, absorbed=True)
        t += float(expo.take()[0]) / lambda_u
        if t > horizon:
            break
        nxt = _jump(cdf[state], unif.take()[0])
        if nxt != state:
            state = nxt
            times.append(t)
            states.append(state)
    else:
        horizon = times[-1] if times[-1] > 0 else horizon
    return _path(times, states, horizon)


def transient_distribution(g, t, init, tol=1e-12, lambda_u=None):
    """State distribution at time ``t`` by the uniformization series.

    ``sum_k Poisson(k; lambda_u t) * init P^k`` truncated once the
    remaining Poisson mass is below ``tol``.  ``init`` is a state index or
    an initial distribution.
    """
    if t < 0:
        raise ValidationError("t must be >= 0")
    if tol <= 0:
        raise ValidationError("tol must be > 0")
    q = as_generator(g)
    n = q.shape[0]
    if np.isscalar(init):
        v = np.zeros(n)
        v[_check_init(init, n)] = 1.0
    else:
        v = np.array(init, dtype=np.float64)
        if v.shape != (n,) or np.any(v < 0) or abs(v.sum() - 1) > 1e-12:
            raise ValidationError("initial distribution must be a probability vector")
    p, lam = uniformize(q, lambda_u)
    mu = lam * t
    if mu == 0:
        return v
    right = int(scipy.stats.poisson.isf(tol, mu)) + 1
    weights = scipy.stats.poisson.pmf(np.arange(right + 1), mu)
    out = weights[0] * v
    for k in range(1, right + 1):
        v = v @ p
        out = out + weights[k] * v
    return out


def extract_sojourns(traj):
    """Completed sojourn durations per state, plus the censored final visit.

    Returns ``(durations, censored)`` where ``durations`` maps each state to
    a list of completed visit lengths in order and ``censored`` is
    ``(state, duration)`` for the last visit cut off by the horizon.
    """
    t = traj.times
    s = traj.states
    durations = {}
    lengths = np.diff(t)
    for state, d in zip(s[:-1].tolist(), lengths.tolist()):
        durations.setdefault(state, []).append(d)
    censored = (s[-1].item(), float(traj.horizon - t[-1]))
    return durations, censored
