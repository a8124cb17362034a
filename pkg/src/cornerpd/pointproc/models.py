"""Sojourn / interarrival distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cornerpd.errors import ValidationError


def _positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise ValidationError(f"{name} must be finite and > 0, got {value!r}")


class SojournModel:
    """Base class.  Subclasses are frozen dataclasses with ``sample``,
    ``mean`` and ``sample_length_biased`` (the length of the interval that
    covers a fixed time point in a stationary renewal process)."""

    kind = ""

    def sample(self, rng, size):
        raise NotImplementedError

    def sample_length_biased(self, rng, size):
        raise NotImplementedError

    @property
    def mean(self):
        raise NotImplementedError

    def scaled(self, factor):
        """Same family with every draw multiplied by ``factor``."""
        raise NotImplementedError

    def to_dict(self):
        d = {"kind": self.kind}
        d.update(self.__dict__)
        return d


@dataclass(frozen=True)
class Exponential(SojournModel):
    rate: float
    kind = "exponential"

    def __post_init__(self):
        _positive("rate", self.rate)

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)

    def sample_length_biased(self, rng, size):
        # x f(x) / mean is Gamma(2, 1/rate).
        return rng.gamma(2.0, 1.0 / self.rate, size)

    @property
    def mean(self):
        return 1.0 / self.rate

    def scaled(self, factor):
        return Exponential(self.rate / factor)


@dataclass(frozen=True)
class UniformInterval(SojournModel):
    a: float
    b: float
    kind = "uniform"

    def __post_init__(self):
        _positive("a", self.a)
        _positive("b", self.b)
        if not self.a < self.b:
            raise ValidationError(f"UniformInterval needs a < b, got ({self.a}, {self.b})")

    def sample(self, rng, size):
        return rng.uniform(self.a, self.b, size)

    def sample_length_biased(self, rng, size):
        # density x / (mean (b - a)) on [a, b]; inverse CDF below.
        u = rng.random(size)
        return np.sqrt(self.a**2 + u * (self.b**2 - self.a**2))

    @property
    def mean(self):
        return 0.5 * (self.a + self.b)

    def scaled(self, factor):
        return UniformInterval(self.a * factor, self.b * factor)


@dataclass(frozen=True)
class Deterministic(SojournModel):
    d: float
    kind = "deterministic"

    def __post_init__(self):
        _positive("d", self.d)

    def sample(self, rng, size):
        return np.full(size, float(self.d))

    def sample_length_biased(self, rng, size):
        return np.full(size, float(self.d))

    @property
    def mean(self):
        return float(self.d)

    def scaled(self, factor):
        return Deterministic(self.d * factor)


@dataclass(frozen=True)
class Weibull(SojournModel):
    shape: float
    scale: float
    kind = "weibull"

    def __post_init__(self):
        _positive("shape", self.shape)
        _positive("scale", self.scale)

    def sample(self, rng, size):
        return self.scale * rng.weibull(self.shape, size)

    def sample_length_biased(self, rng, size):
        # (L / scale)^shape ~ Gamma(1 + 1/shape, 1) under length biasing.
        g = rng.gamma(1.0 + 1.0 / self.shape, 1.0, size)
        return self.scale * g ** (1.0 / self.shape)

    @property
    def mean(self):
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)

    def scaled(self, factor):
        return Weibull(self.shape, self.scale * factor)


_KINDS = {cls.kind: cls for cls in (Exponential, UniformInterval, Deterministic, Weibull)}


def model_from_dict(d):
    """Inverse of ``SojournModel.to_dict``."""
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _KINDS:
        raise ValidationError(f"unknown sojourn model kind {kind!r}; expected one of {sorted(_KINDS)}")
    try:
        return _KINDS[kind](**d)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {kind}: {exc}") from None
