"""Discrete-time +-j valued series: sampling paths, telegraph chains, ACF estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cornerpd.errors import ValidationError
from cornerpd.membership import AcfSequence, lattice_rho0
from cornerpd.rng import substream


def map_states_pm(traj, mapping, sample_dt):
    """Sample ``traj`` at ``k * sample_dt`` and map states to nonzero integers."""
    if not (np.isfinite(sample_dt) and sample_dt > 0):
        raise ValidationError("sample_dt must be > 0")
    for state in np.unique(traj.states).tolist():
        if state not in mapping:
            raise ValidationError(f"state {state!r} has no mapping")
    for v in mapping.values():
        if int(v) != v or v == 0:
            raise ValidationError(f"mapped value {v!r} must be a nonzero integer")
    count = int(np.floor(traj.horizon / sample_dt + 1e-9)) + 1
    grid = np.minimum(np.arange(count) * sample_dt, traj.horizon)
    sampled = traj.state_at(grid)
    return np.array([int(mapping[s]) for s in sampled.tolist()], dtype=np.int64)


def telegraph_simulate(p_flip, length, seed=None):
    """+-1 Markov chain: ``X_0`` uniform, ``X_{n+1} = -X_n`` with probability ``p_flip``.

    Its autocorrelation is ``(1 - 2 p_flip)^n``.
    """
    if not 0 < p_flip < 1:
        raise ValidationError("p_flip must lie in (0, 1)")
    if length < 1:
        raise ValidationError("length must be >= 1")
    rng = substream(seed)
    x0 = 1 if rng.random() < 0.5 else -1
    flips = rng.random(length - 1) < p_flip
    parity = np.concatenate([[0], np.cumsum(flips)]) & 1
    return (x0 * (1 - 2 * parity)).astype(np.int64)


@dataclass(frozen=True)
class AcfEstimate:
    """Sample autocorrelation: ``raw[k]`` is the lag-k mean product,
    ``normalized`` divides by ``raw[0]``."""

    raw: np.ndarray
    normalized: np.ndarray
    denominator: str

    def to_acf(self, m_bound=1):
        """Clamped ``AcfSequence`` with the lag-0 value forced to the class value."""
        rho0 = lattice_rho0(m_bound)
        r = np.clip(self.normalized, -1.0, 1.0) * rho0
        r[0] = rho0
        return AcfSequence(r, m_bound)


def acf_estimate(x, max_lag, denominator="unbiased"):
    """``rho_hat[k] = sum_m x_m x_{m+k} / (T - k)``; ``denominator="biased"`` divides by ``T``.

    The biased form keeps the Toeplitz matrix PSD; the unbiased one does not
    always.  Integer input is summed exactly.
    """
    v = np.asarray(x)
    if v.ndim != 1:
        raise ValidationError("series must be one-dimensional")
    T = v.size
    if not 0 <= max_lag < T:
        raise ValidationError(f"need len(x) > max_lag >= 0, got len {T}, max_lag {max_lag}")
    if denominator not in ("unbiased", "biased"):
        raise ValidationError(f"unknown denominator {denominator!r}")
    v = v.astype(np.int64) if v.dtype.kind in "iub" else v.astype(np.float64)
    raw = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        s = np.dot(v[: T - k], v[k:])
        raw[k] = float(s) / (T - k if denominator == "unbiased" else T)
    if raw[0] == 0:
        raise ValidationError("series has zero power")
    return AcfEstimate(raw, raw / raw[0], denominator)
