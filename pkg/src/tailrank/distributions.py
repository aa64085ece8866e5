"""Pareto, Fréchet and Burr laws, seeded inverse-transform samplers and scaling transforms.

All samplers draw open-interval uniforms from a counter-based Philox stream keyed by
``(seed, *stream)`` and push them through the law's quantile function, so two calls
with the same law, size, seed and stream return bitwise-identical arrays.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateThresholdError,
    EmptySampleError,
    InvalidGammaError,
    OutOfSupportError,
)

__all__ = [
    "ParetoCandidate",
    "FrechetLaw",
    "BurrLaw",
    "ScalingKind",
    "Sample",
    "make_rng",
    "open_uniforms",
    "pareto_cdf",
    "sample_pareto",
    "sample_frechet",
    "sample_burr",
    "apply_scaling",
    "tail_counterpart_cdf",
]

_TWO_M53 = 2.0 ** -53


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for the stream ``(seed, *stream)``; distinct streams never share state."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def open_uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    # (2i + 1) * 2**-53 lies strictly inside (0, 1) and both u and 1 - u are exact doubles
    i = rng.integers(0, 2 ** 52, size=n, dtype=np.int64)
    return (2.0 * i.astype(np.float64) + 1.0) * _TWO_M53


def _check_positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise InvalidGammaError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class ParetoCandidate:
    """Pareto law on [1, inf) with tail index ``gamma``: survival x**(-1/gamma)."""

    gamma: float

    def __post_init__(self):
        _check_positive("gamma", self.gamma)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def alpha(self) -> float:
        return 1.0 / self.gamma

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 1.0, 1.0, np.power(np.maximum(x, 1.0), -self.alpha))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 1.0, 0.0, -np.expm1(-self.alpha * np.log(np.maximum(x, 1.0))))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, 1.0)
        return np.where(x < 1.0, 0.0, self.alpha * xs ** (-self.alpha - 1.0))

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, 1.0)
        return np.where(x < 1.0, -np.inf, -np.log(self.gamma) - (self.alpha + 1.0) * np.log(xs))

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(-self.gamma * np.log1p(-u))

    def mean(self) -> float:
        return self.alpha / (self.alpha - 1.0) if self.alpha > 1.0 else np.inf

    def median(self) -> float:
        return 2.0 ** self.gamma


@dataclass(frozen=True)
class FrechetLaw:
    """Fréchet law exp(-x**(-s)); tail index 1/s."""

    shape_s: float

    def __post_init__(self):
        _check_positive("shape_s", self.shape_s)
        object.__setattr__(self, "shape_s", float(self.shape_s))

    @classmethod
    def from_gamma(cls, gamma: float) -> "FrechetLaw":
        _check_positive("gamma", gamma)
        return cls(1.0 / gamma)

    @property
    def gamma(self) -> float:
        return 1.0 / self.shape_s

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x <= 0.0, 0.0, np.exp(-np.power(np.maximum(x, 0.0), -self.shape_s)))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x <= 0.0, 1.0, -np.expm1(-np.power(np.maximum(x, 0.0), -self.shape_s)))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        s = self.shape_s
        xs = np.where(x > 0.0, x, 1.0)
        out = s * xs ** (-s - 1.0) * np.exp(-xs ** (-s))
        return np.where(x > 0.0, out, 0.0)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        return np.power(-np.log1p(u - 1.0), -1.0 / self.shape_s)


@dataclass(frozen=True)
class BurrLaw:
    """Burr XII law 1 - (1 + x**c)**(-t); tail index 1/(c t)."""

    shape_c: float
    shape_t: float = 1.0

    def __post_init__(self):
        _check_positive("shape_c", self.shape_c)
        _check_positive("shape_t", self.shape_t)
        object.__setattr__(self, "shape_c", float(self.shape_c))
        object.__setattr__(self, "shape_t", float(self.shape_t))

    @classmethod
    def from_gamma(cls, gamma: float, t: float = 1.0) -> "BurrLaw":
        _check_positive("gamma", gamma)
        return cls(1.0 / (gamma * t), t)

    @property
    def gamma(self) -> float:
        return 1.0 / (self.shape_c * self.shape_t)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, 0.0)
        return np.exp(-self.shape_t * np.log1p(xs ** self.shape_c))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, 0.0)
        return -np.expm1(-self.shape_t * np.log1p(xs ** self.shape_c))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        c, t = self.shape_c, self.shape_t
        xs = np.where(x > 0.0, x, 1.0)
        out = c * t * xs ** (c - 1.0) * (1.0 + xs ** c) ** (-t - 1.0)
        return np.where(x > 0.0, out, 0.0)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        return np.power(np.expm1(-np.log1p(-u) / self.shape_t), 1.0 / self.shape_c)


class ScalingKind(enum.Enum):
    NONE = "none"
    LINEAR = "linear"
    SINUSOIDAL = "sinusoidal"

    def factors(self, n: int) -> np.ndarray:
        """Scale factor for observation indices 1..n."""
        r = np.arange(1, n + 1, dtype=float) / n
        if self is ScalingKind.NONE:
            return np.ones(n)
        if self is ScalingKind.LINEAR:
            return r
        return 1.5 + 0.5 * np.sin(6.0 * r * np.pi)


@dataclass(frozen=True)
class Sample:
    """Positive observations in their original index order, plus provenance."""

    values: np.ndarray
    seed: int | tuple[int, ...] | None = None
    dgp_label: str = ""
    _sorted: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).ravel()
        if v.size == 0:
            raise EmptySampleError("sample is empty")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise OutOfSupportError("sample values must be finite and strictly positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n

    def sorted_values(self) -> np.ndarray:
        """Ascending order statistics, computed once and cached."""
        if self._sorted is None:
            s = np.sort(self.values)
            s.setflags(write=False)
            object.__setattr__(self, "_sorted", s)
        return self._sorted


def pareto_cdf(candidate: ParetoCandidate, x):
    out = candidate.cdf(x)
    return float(out) if np.ndim(out) == 0 else out


def _draw(law, n, seed, stream, label):
    if n < 1:
        raise EmptySampleError("n must be at least 1")
    u = open_uniforms(make_rng(seed, *stream), int(n))
    key = (int(seed), *map(int, stream)) if stream else int(seed)
    return Sample(law.quantile(u), seed=key, dgp_label=label)


def sample_pareto(candidate: ParetoCandidate, n: int, seed: int, stream: Sequence[int] = ()) -> Sample:
    return _draw(candidate, n, seed, stream, f"pareto(gamma={candidate.gamma:g})")


def sample_frechet(law: FrechetLaw, n: int, seed: int, stream: Sequence[int] = ()) -> Sample:
    return _draw(law, n, seed, stream, f"frechet(s={law.shape_s:g})")


def sample_burr(law: BurrLaw, n: int, seed: int, stream: Sequence[int] = ()) -> Sample:
    return _draw(law, n, seed, stream, f"burr(c={law.shape_c:g},t={law.shape_t:g})")


def apply_scaling(sample: Sample, kind: ScalingKind) -> Sample:
    """Multiply observation i (1-based, original order) by its scale factor."""
    kind = ScalingKind(kind)
    if kind is ScalingKind.NONE:
        return sample
    scaled = sample.values * kind.factors(sample.n)
    return Sample(scaled, seed=sample.seed, dgp_label=f"{sample.dgp_label}*{kind.value}")


def tail_counterpart_cdf(base: Callable | object, t: float, x):
    """Distribution function of Y/t given Y > t, evaluated at ``x``.

    ``base`` is either a law exposing ``sf``/``cdf`` or a bare cdf callable. The survival
    form is used when available to avoid cancellation for large thresholds.
    """
    if t < 1.0:
        raise OutOfSupportError(f"threshold t must be >= 1, got {t}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 1.0):
        raise OutOfSupportError("tail counterpart is supported on [1, inf)")
    sf = getattr(base, "sf", None)
    if sf is not None:
        st = float(sf(t))
        if st <= 0.0:
            raise DegenerateThresholdError(f"base law has no mass above t={t}")
        out = (st - sf(t * x)) / st
    else:
        cdf = getattr(base, "cdf", base)
        gt = float(cdf(t))
        if gt >= 1.0:
            raise DegenerateThresholdError(f"base cdf equals 1 at t={t}")
        out = (cdf(t * x) - gt) / (1.0 - gt)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out
