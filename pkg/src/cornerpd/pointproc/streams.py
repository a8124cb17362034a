"""Event streams: renewal sampling, superposition and Poissonness statistics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from cornerpd.errors import ValidationError
from cornerpd.pointproc.models import Exponential
from cornerpd.rng import DEFAULT_SEED, substream

TIE_JITTER = 1e-12


def _break_ties(times):
    d = np.diff(times)
    if d.size == 0 or np.all(d > 0):
        return times
    warnings.warn("coincident event timestamps jittered by 1e-12", stacklevel=4)
    t = times.copy()
    for i in np.flatnonzero(d <= 0) + 1:
        if t[i] <= t[i - 1]:
            t[i] = t[i - 1] + TIE_JITTER
    # later entries may now collide with the shifted ones
    for i in range(1, t.size):
        if t[i] <= t[i - 1]:
            t[i] = t[i - 1] + TIE_JITTER
    return t


@dataclass(frozen=True)
class EventStream:
    """Time-sorted events on ``[0, horizon]`` with integer source labels."""

    times: np.ndarray
    sources: np.ndarray
    horizon: float

    def __post_init__(self):
        t = np.array(self.times, dtype=np.float64).ravel()
        s = np.array(self.sources, dtype=np.int64).ravel()
        if t.shape != s.shape:
            raise ValidationError("times and sources must have the same length")
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ValidationError("horizon must be finite and > 0")
        if t.size and (t[0] < 0 or t[-1] > self.horizon):
            raise ValidationError("event times must lie in [0, horizon]")
        if np.any(np.diff(t) < 0):
            raise ValidationError("event times must be sorted")
        t = _break_ties(t)
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "sources", s)
        object.__setattr__(self, "horizon", float(self.horizon))

    def __len__(self):
        return self.times.size

    @property
    def events(self):
        return list(zip(self.times.tolist(), self.sources.tolist()))

    def by_source(self, source_id):
        keep = self.sources == source_id
        return EventStream(self.times[keep], self.sources[keep], self.horizon)


def sample_renewal(model, horizon, seed=None, source_id=0, stationary=False, offset=0.0):
    """Renewal process on ``[0, horizon]`` with i.i.d. interarrivals from ``model``.

    Events sit at ``offset + partial sums``.  With ``stationary=True`` the
    first event is placed as in the time-stationary version of the process
    (uniform position inside a length-biased interval).
    """
    if not (np.isfinite(horizon) and horizon > 0):
        raise ValidationError("horizon must be finite and > 0")
    rng = substream(seed)
    chunk = int(1.2 * horizon / model.mean) + 16
    parts = []
    t = float(offset)
    first = True
    while True:
        gaps = model.sample(rng, chunk)
        if first and stationary:
            gaps[0] = rng.random() * model.sample_length_biased(rng, 1)[0]
        first = False
        times = t + np.cumsum(gaps)
        inside = times[times <= horizon]
        parts.append(inside)
        if inside.size < times.size:
            break
        t = float(times[-1])
    times = np.concatenate(parts)
    return EventStream(times, np.full(times.size, source_id, dtype=np.int64), horizon)


def superpose(streams, relabel=False):
    """Merge streams into one time-sorted stream.

    Labels are kept as they are, or replaced by the stream's position in
    ``streams`` when ``relabel`` is set.
    """
    streams = list(streams)
    if not streams:
        raise ValidationError("nothing to superpose")
    h = streams[0].horizon
    for s in streams[1:]:
        if abs(s.horizon - h) > 1e-12 * max(1.0, h):
            raise ValidationError(f"horizon mismatch: {s.horizon} vs {h}")
    times = np.concatenate([s.times for s in streams])
    if relabel:
        sources = np.concatenate([np.full(len(s), k, dtype=np.int64) for k, s in enumerate(streams)])
    else:
        sources = np.concatenate([s.sources for s in streams])
    order = np.argsort(times, kind="stable")
    return EventStream(times[order], sources[order], h)


@dataclass(frozen=True)
class PoissonnessReport:
    ks_statistic: float
    lambda_hat: float
    dispersion_index: float
    n_events: int
    n_bins: int


def poisson_stats(stream, n_bins=100):
    """Rate, fitted-exponential KS distance of interarrivals, and index of dispersion.

    The exponential is fitted with ``lambda_hat = count / horizon`` (a
    Lilliefors-type statistic, so asymptotic KS tables are conservative).
    """
    n = len(stream)
    if n < 10:
        raise ValidationError(f"need at least 10 events, got {n}")
    if n_bins < 10:
        raise ValidationError("n_bins must be >= 10")
    lam = n / stream.horizon
    gaps = np.diff(stream.times)
    ks = scipy.stats.kstest(gaps, "expon", args=(0.0, 1.0 / lam)).statistic
    counts, _ = np.histogram(stream.times, bins=n_bins, range=(0.0, stream.horizon))
    disp = float(np.var(counts, ddof=1) / np.mean(counts)) if counts.mean() > 0 else float("nan")
    return PoissonnessReport(float(ks), float(lam), disp, n, int(n_bins))


@dataclass(frozen=True)
class SparseSummary:
    """Per-``n`` results of the sparse superposition experiment."""

    n_sources: int
    median_ks: float
    median_dispersion: float
    ks: tuple = field(repr=False)
    dispersion: tuple = field(repr=False)


def sparse_stream(n_sources, base, total_rate, horizon, seed, replicate=0, stationary=True):
    """Superpose ``n`` i.i.d. renewal copies of ``base``, each slowed so the
    merged rate is ``total_rate``.  Source ``k`` of replicate ``r`` draws
    from substream ``(seed, r, k)``."""
    if n_sources < 1:
        raise ValidationError("n_sources must be >= 1")
    model = base.scaled(n_sources / (total_rate * base.mean))
    parts = [
        sample_renewal(model, horizon, substream(seed, replicate, k), source_id=k, stationary=stationary)
        for k in range(n_sources)
    ]
    return superpose(parts)


def sparse_superposition_experiment(
    n_sources, base, total_rate=1.0, horizon=1e4, seeds=20, seed=DEFAULT_SEED, n_bins=None, stationary=True
):
    """Poissonness of sparse superpositions as the number of sources grows.

    ``n_sources`` is an int or a list of ints.  ``n_bins`` defaults to one
    bin per expected merged event, which keeps the bin width fixed relative
    to the merged rate.
    """
    ns = [n_sources] if np.isscalar(n_sources) else list(n_sources)
    if n_bins is None:
        n_bins = max(10, int(round(total_rate * horizon)))
    out = []
    for n in ns:
        reports = [
            poisson_stats(sparse_stream(n, base, total_rate, horizon, seed, r, stationary), n_bins)
            for r in range(seeds)
        ]
        ks = tuple(r.ks_statistic for r in reports)
        disp = tuple(r.dispersion_index for r in reports)
        out.append(SparseSummary(int(n), float(np.median(ks)), float(np.median(disp)), ks, disp))
    return out


def calibrate_ks_null(total_rate=1.0, horizon=1e4, replicates=200, alpha=0.05, seed=DEFAULT_SEED):
    """Empirical ``1 - alpha`` quantile of the fitted-exponential KS statistic
    for a true Poisson stream of the given rate and horizon."""
    stats = []
    for r in range(replicates):
        s = sample_renewal(Exponential(total_rate), horizon, substream(seed, 7, r))
        stats.append(poisson_stats(s, 10).ks_statistic)
    return float(np.quantile(stats, 1.0 - alpha))
