"""Logarithmic and energy scores of Pareto candidates at normalized observations.

Scores are positively oriented: larger is better. The energy score of a Pareto(gamma)
forecast at ``z >= 1`` is

    ES_beta(F_gamma, z) = 0.5 * E|X - X'|**beta - E|X - z|**beta,   X, X' ~ F_gamma iid,

finite iff ``beta < 1/gamma``. ``E|X - z|**beta`` splits at ``z``; the part above ``z``
is a complete Beta integral and the part below is summed as a power series.
"""
from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import special

from .distributions import ParetoCandidate
from .errors import (
    InvalidBetaError,
    MomentDivergenceError,
    OutOfSupportError,
    SingularParameterError,
    TailRankError,
)

__all__ = [
    "ScoreRule",
    "LOGS",
    "logs_pareto",
    "expected_distance",
    "pair_difference",
    "es_beta_pareto",
    "score",
    "expected_logs",
    "var_logs",
    "var_es1",
]


@dataclass(frozen=True)
class ScoreRule:
    """``ScoreRule("logs")`` or ``ScoreRule("es", beta)``; CRPS is ``ScoreRule("es", 1.0)``."""

    kind: str
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ("logs", "es"):
            raise TailRankError(f"unknown score rule {self.kind!r}")
        if self.kind == "logs":
            if self.beta is not None:
                raise TailRankError("LogS takes no beta")
        else:
            b = float(self.beta) if self.beta is not None else float("nan")
            if not (0.0 < b < 2.0):
                raise InvalidBetaError(f"energy score needs 0 < beta < 2, got {self.beta!r}")
            object.__setattr__(self, "beta", b)

    @classmethod
    def energy(cls, beta: float) -> "ScoreRule":
        return cls("es", beta)

    @classmethod
    def parse(cls, text: str) -> "ScoreRule":
        """Parse ``logs``, ``crps`` or ``es:<beta>``."""
        t = text.strip().lower()
        if t in ("logs", "log"):
            return cls("logs")
        if t == "crps":
            return cls("es", 1.0)
        m = re.fullmatch(r"es:([0-9.eE+-]+)", t)
        if m is None:
            raise TailRankError(f"cannot parse score rule {text!r}; use logs, crps or es:<beta>")
        return cls("es", float(m.group(1)))

    @property
    def label(self) -> str:
        return "logs" if self.kind == "logs" else f"es:{self.beta:.17g}"

    def check(self, gamma: float) -> None:
        """Raise if the rule has no finite expectation under Pareto(gamma)."""
        if self.kind == "es" and self.beta >= 1.0 / gamma:
            raise MomentDivergenceError(
                f"ES_beta needs beta < 1/gamma; beta={self.beta}, gamma={gamma}"
            )


LOGS = ScoreRule("logs")


def _as_support(z):
    z = np.asarray(z, dtype=float)
    if np.any(z < 1.0) or np.any(np.isnan(z)):
        raise OutOfSupportError("normalized observations must satisfy z >= 1")
    return z


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def logs_pareto(candidate: ParetoCandidate, z):
    """log f_gamma(z) = -log(gamma) - (1/gamma + 1) log(z)."""
    z = _as_support(z)
    g = candidate.gamma
    return _scalar(-math.log(g) - (1.0 / g + 1.0) * np.log(z))


_SERIES_TOL = 1e-18
_FAR_TERMS = 64


@functools.lru_cache(maxsize=8192)
def _near_coefficients(alpha: float, beta: float) -> np.ndarray:
    """Coefficients of Q with int_0^s t**beta (1-t)**(-alpha-1) dt = s**(beta+1) Q(s), s <= 1/2."""
    coef = [1.0 / (beta + 1.0)]
    a = 1.0
    j = 0
    while True:
        j += 1
        a *= (alpha + j) / j
        c = a / (j + beta + 1.0)
        coef.append(c)
        if j > alpha + 2 and c * 0.5 ** j < _SERIES_TOL * coef[0]:
            break
    out = np.array(coef)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=8192)
def _far_coefficients(alpha: float, beta: float):
    """Pieces of int_{1/z}^{1/2} (1-v)**beta v**(-alpha-1) dv for z >= 2.

    With b_m the coefficients of (1-v)**beta and e_m = m - alpha this equals
    K - z**alpha * P(1/z) + b_ms * I_ms(z), where ms is the integer nearest alpha,
    P(x) = sum_{m != ms} (b_m/e_m) x**m and K = sum_{m != ms} b_m 2**(-e_m)/e_m.
    Returns P's coefficients, K plus the integral over [1/2, 1], ms and b_ms.
    """
    m = np.arange(_FAR_TERMS, dtype=float)
    b = np.empty(_FAR_TERMS)
    b[0] = 1.0
    for i in range(1, _FAR_TERMS):
        b[i] = b[i - 1] * (i - 1 - beta) / i
    e = m - alpha
    ms = int(np.floor(alpha + 0.5))
    keep = np.ones(_FAR_TERMS, dtype=bool)
    if ms < _FAR_TERMS:
        keep[ms] = False
    poly = np.where(keep, b / np.where(keep, e, 1.0), 0.0)
    poly.setflags(write=False)
    k_const = float(np.sum(poly * 2.0 ** (-e)))
    # the piece over [1/2, 1] is the near-series integral at s = 1/2
    c_const = 0.5 ** (beta + 1.0) * float(np.polynomial.polynomial.polyval(0.5, _near_coefficients(alpha, beta)))
    b_ms = float(b[ms]) if ms < _FAR_TERMS else 0.0
    return poly, c_const + k_const, ms, b_ms


def _stable_power_integral(e: float, log_half_z: np.ndarray) -> np.ndarray:
    # int_{1/z}^{1/2} v**(e-1) dv = 2**(-e) * (1 - (z/2)**(-e)) / e, finite as e -> 0
    if e == 0.0:
        return log_half_z
    return 2.0 ** (-e) * (-np.expm1(-e * log_half_z)) / e


class DistanceKernel:
    """E|X - z|**beta for X ~ Pareto(gamma), precomputed for fixed observations and beta.

    The part above z is alpha * B(alpha - beta, beta + 1) * z**(beta - alpha). The part
    below z is alpha * z**(beta - alpha) * int_{1/z}^1 (1-v)**beta v**(-alpha-1) dv, a
    power series in s = 1 - 1/z for z < 2 and in 1/z for z >= 2. Powers of s and 1/z
    do not depend on gamma, so many candidates cost one matrix product.
    """

    def __init__(self, z, beta: float):
        z = np.atleast_1d(_as_support(z))
        self.z = z
        self.beta = b = float(beta)
        self.log_z = np.log(z)
        self.near = np.flatnonzero(z < 2.0)
        self.far = np.flatnonzero(z >= 2.0)
        s = -np.expm1(-self.log_z[self.near])
        self._s = s
        self._s_pow_b1 = s ** (b + 1.0)
        self._near_powers = np.empty((s.size, 0))
        x = 1.0 / z[self.far]
        self._far_powers = x[:, None] ** np.arange(_FAR_TERMS)
        self._far_log_half_z = self.log_z[self.far] - math.log(2.0)
        self._far_z_b = z[self.far] ** b

    def _near_matrix(self, terms: int) -> np.ndarray:
        if self._near_powers.shape[1] < terms:
            self._near_powers = self._s[:, None] ** np.arange(terms)
        return self._near_powers[:, :terms]

    def _check(self, alpha):
        if self.beta >= alpha:
            raise MomentDivergenceError(
                f"E|X - z|^beta diverges for beta={self.beta} >= 1/gamma={alpha}"
            )

    def expected(self, gamma: float) -> np.ndarray:
        """E|X - z|**beta at every stored observation."""
        alpha = 1.0 / float(gamma)
        self._check(alpha)
        b = self.beta
        z_pow = np.exp((b - alpha) * self.log_z)  # z**(beta - alpha)
        out = alpha * special.beta(alpha - b, b + 1.0) * z_pow
        if self.near.size:
            q = _near_coefficients(alpha, b)
            series = self._near_matrix(q.size) @ q
            out[self.near] += alpha * z_pow[self.near] * self._s_pow_b1 * series
        if self.far.size:
            poly, bracket, ms, b_ms = _far_coefficients(alpha, b)
            if b_ms != 0.0:
                bracket = bracket + b_ms * _stable_power_integral(ms - alpha, self._far_log_half_z)
            zp = z_pow[self.far]
            out[self.far] += alpha * (zp * bracket - self._far_z_b * (self._far_powers @ poly))
        return out

    def expected_matrix(self, gammas) -> np.ndarray:
        """E|X - z|**beta for every observation (rows) and every gamma (columns)."""
        alphas = 1.0 / np.atleast_1d(np.asarray(gammas, dtype=float))
        for a in alphas:
            self._check(a)
        b = self.beta
        z_pow = np.exp(np.outer(self.log_z, b - alphas))
        out = alphas * special.beta(alphas - b, b + 1.0) * z_pow
        if self.near.size:
            qs = [_near_coefficients(float(a), b) for a in alphas]
            q = np.zeros((max(c.size for c in qs), alphas.size))
            for j, c in enumerate(qs):
                q[: c.size, j] = c
            series = self._near_matrix(q.shape[0]) @ q
            out[self.near] += alphas * z_pow[self.near] * (self._s_pow_b1[:, None] * series)
        if self.far.size:
            parts = [_far_coefficients(float(a), b) for a in alphas]
            poly = np.stack([p[0] for p in parts], axis=1)
            bracket = np.array([p[1] for p in parts])
            lhz = self._far_log_half_z
            br = np.broadcast_to(bracket, (lhz.size, alphas.size)).copy()
            for j, (_, _, ms, b_ms) in enumerate(parts):
                if b_ms != 0.0:
                    br[:, j] += b_ms * _stable_power_integral(ms - alphas[j], lhz)
            zp = z_pow[self.far]
            out[self.far] += alphas * (zp * br - self._far_z_b[:, None] * (self._far_powers @ poly))
        return out

    def mean_expected(self, gammas, block: int = 4_000_000) -> np.ndarray:
        """Mean of E|X - z|**beta over the stored observations, one value per gamma.

        Sums over observations are taken before expanding over gamma, so the only
        observation-by-gamma arrays are the powers z**(beta - alpha).
        """
        g = np.atleast_1d(np.asarray(gammas, dtype=float))
        step = max(1, block // max(self.z.size, 1))
        return np.concatenate([self._mean_block(g[i : i + step]) for i in range(0, g.size, step)])

    def _mean_block(self, gammas: np.ndarray) -> np.ndarray:
        alphas = 1.0 / gammas
        for a in alphas:
            self._check(a)
        b = self.beta
        total = np.zeros(alphas.size)
        upper = alphas * special.beta(alphas - b, b + 1.0)
        if self.near.size:
            zp = np.exp(np.outer(self.log_z[self.near], b - alphas))
            qs = [_near_coefficients(float(a), b) for a in alphas]
            q = np.zeros((max(c.size for c in qs), alphas.size))
            for j, c in enumerate(qs):
                q[: c.size, j] = c
            weighted = self._near_matrix(q.shape[0]) * self._s_pow_b1[:, None]
            total += upper * zp.sum(axis=0) + alphas * np.einsum("tg,tg->g", weighted.T @ zp, q)
        if self.far.size:
            lz = self.log_z[self.far]
            zp = np.exp(np.outer(lz, b - alphas))
            parts = [_far_coefficients(float(a), b) for a in alphas]
            poly = np.stack([p[0] for p in parts], axis=1)
            bracket = np.array([p[1] for p in parts])
            zp_sum = zp.sum(axis=0)
            acc = (upper + alphas * bracket) * zp_sum
            lhz = self._far_log_half_z
            for j, (_, _, ms, b_ms) in enumerate(parts):
                if b_ms != 0.0:
                    acc[j] += alphas[j] * b_ms * float(zp[:, j] @ _stable_power_integral(ms - alphas[j], lhz))
            acc -= alphas * ((self._far_z_b @ self._far_powers) @ poly)
            total += acc
        return total / self.z.size


def expected_distance(gamma: float, beta: float, z):
    """E|X - z|**beta for X ~ Pareto(gamma) and z >= 1."""
    out = DistanceKernel(z, beta).expected(gamma)
    return float(out[0]) if np.ndim(z) == 0 else out.reshape(np.shape(z))


def pair_difference(gamma: float, beta: float) -> float:
    """E|X - X'|**beta for X, X' iid Pareto(gamma).

    min(X, X') ~ Pareto(2 alpha) is independent of max/min ~ Pareto(alpha), so the
    constant factorizes into E[min**beta] * E[(R - 1)**beta].
    """
    gamma, beta = float(gamma), float(beta)
    if not (0.0 < beta < 2.0):
        raise InvalidBetaError(f"beta must lie in (0, 2), got {beta}")
    alpha = 1.0 / gamma
    if beta >= alpha:
        raise MomentDivergenceError(f"E|X - X'|^beta diverges for beta={beta} >= 1/gamma")
    return 2.0 * alpha / (2.0 * alpha - beta) * alpha * float(special.beta(alpha - beta, beta + 1.0))


def es_beta_pareto(candidate: ParetoCandidate, beta: float, z):
    """Energy score of Pareto(gamma) at z (positively oriented)."""
    beta = float(beta)
    if not (0.0 < beta < 2.0):
        raise InvalidBetaError(f"beta must lie in (0, 2), got {beta}")
    if beta >= candidate.alpha:
        raise MomentDivergenceError(
            f"ES_beta needs beta < 1/gamma; beta={beta}, gamma={candidate.gamma}"
        )
    d = pair_difference(candidate.gamma, beta)
    return _scalar(0.5 * d - expected_distance(candidate.gamma, beta, z))


def score(rule: ScoreRule, candidate: ParetoCandidate, z):
    """Evaluate ``rule`` for ``candidate`` at normalized observation(s) ``z``."""
    if rule.kind == "logs":
        return logs_pareto(candidate, z)
    return es_beta_pareto(candidate, rule.beta, z)


def expected_logs(candidate_gamma: float, true_gamma: float) -> float:
    """E[LogS(F_gamma, Y)] for Y ~ Pareto(true_gamma), using E[log Y] = true_gamma."""
    g = float(candidate_gamma)
    return -math.log(g) - (1.0 / g + 1.0) * float(true_gamma)


def var_logs(candidate_gamma: float, true_gamma: float) -> float:
    g = float(candidate_gamma)
    return (1.0 / g + 1.0) ** 2 * float(true_gamma) ** 2


def var_es1(candidate_gamma: float, true_gamma: float) -> float:
    """Var(CRPS(F_gamma, Y)) for Y ~ Pareto(true_gamma).

    Uses E|X - y| = y - a*y**p + const with a = 2g/(g-1), p = 1 - 1/g, and
    E[Y**r] = 1/(1 - r*true_gamma).
    """
    g, gg = float(candidate_gamma), float(true_gamma)
    if g == 1.0:
        raise SingularParameterError("the CRPS variance formula is singular at gamma = 1")
    a = 2.0 * g / (g - 1.0)
    p = 1.0 - 1.0 / g
    dens = {
        "1-2*gG": 1.0 - 2.0 * gg,
        "1-(1+p)*gG": 1.0 - (1.0 + p) * gg,
        "1-2p*gG": 1.0 - 2.0 * p * gg,
        "1-gG": 1.0 - gg,
        "1-p*gG": 1.0 - p * gg,
    }
    bad = [k for k, v in dens.items() if not v > 0.0]
    if bad:
        raise MomentDivergenceError(f"CRPS variance diverges: nonpositive denominator(s) {bad}")
    v = (
        1.0 / dens["1-2*gG"]
        - 2.0 * a / dens["1-(1+p)*gG"]
        + a * a / dens["1-2p*gG"]
        - (1.0 / dens["1-gG"] - a / dens["1-p*gG"]) ** 2
    )
    return max(v, 0.0)
