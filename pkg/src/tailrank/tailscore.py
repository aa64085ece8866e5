"""Normalized upper order statistics and empirical tail scores over a grid of k.

The empirical tail score of a candidate F at k is the mean score of F over the top-k
order statistics divided by the (k+1)-th largest one. Curves over k are ranked by their
average over a stability sub-range of the grid.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .distributions import ParetoCandidate, Sample
from .errors import (
    EmptyRangeError,
    InsufficientDataError,
    InvalidThresholdError,
    MissingPointError,
    TailRankError,
)
from .scoring import LOGS, ScoreRule, DistanceKernel, pair_difference, var_es1, var_logs

__all__ = [
    "TailView",
    "KGrid",
    "ScoreCurve",
    "RankingReport",
    "LowerFraction",
    "Explicit",
    "normalized_exceedances",
    "tail_views",
    "tail_scores",
    "empirical_tail_score",
    "score_curve",
    "score_ci",
    "select_stability_range",
    "rank_candidates",
    "curves_to_csv",
    "curves_to_json",
    "ranking_to_json",
]


@dataclass(frozen=True)
class TailView:
    """Top-k order statistics divided by the (k+1)-th largest, largest first."""

    k: int
    threshold: float
    ratios: np.ndarray

    def __post_init__(self):
        r = np.array(self.ratios, dtype=np.float64).ravel()
        if r.size != self.k:
            raise TailRankError(f"expected {self.k} ratios, got {r.size}")
        r.setflags(write=False)
        object.__setattr__(self, "ratios", r)

    @property
    def log_ratios(self) -> np.ndarray:
        return np.log(self.ratios)


def _views_from_sorted(s: np.ndarray, ks: Iterable[int]) -> list[TailView]:
    n = s.size
    out = []
    for k in ks:
        k = int(k)
        if k < 1 or k >= n:
            raise InsufficientDataError(f"need 1 <= k < n, got k={k}, n={n}")
        thr = float(s[n - k - 1])
        if not thr > 0.0:
            raise InvalidThresholdError(f"threshold at k={k} is {thr}, must be positive")
        out.append(TailView(k, thr, s[n - k:][::-1] / thr))
    return out


def normalized_exceedances(sample: Sample, k: int) -> TailView:
    return _views_from_sorted(sample.sorted_values(), [k])[0]


def tail_views(sample: Sample, ks: Iterable[int]) -> list[TailView]:
    """Views for several k sharing one sort of the sample."""
    return _views_from_sorted(sample.sorted_values(), ks)


@dataclass(frozen=True)
class KGrid:
    """Strictly increasing, deduplicated integer values of k."""

    values: tuple[int, ...]

    def __post_init__(self):
        v = tuple(int(x) for x in self.values)
        if not v:
            raise EmptyRangeError("k grid is empty")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise TailRankError("k grid must be strictly increasing")
        if v[0] < 1:
            raise TailRankError("k grid values must be positive")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @classmethod
    def evenly_spaced(cls, n: int, k_min: int = 50, k_max: int | None = None, points: int = 100):
        """``points`` evenly spaced values in [k_min, k_max] rounded half-up, duplicates dropped.

        ``k_max`` defaults to floor(n/4).
        """
        k_max = n // 4 if k_max is None else int(k_max)
        if k_max < k_min:
            raise EmptyRangeError(f"k_max={k_max} < k_min={k_min} for n={n}")
        raw = np.floor(np.linspace(k_min, k_max, int(points)) + 0.5).astype(int)
        return cls(tuple(np.unique(raw)))

    @classmethod
    def all_integers(cls, n: int, k_min: int = 10, k_max: int | None = None):
        """Every integer from ``k_min`` to ``k_max`` (default floor(n/4))."""
        k_max = n // 4 if k_max is None else int(k_max)
        if k_max < k_min:
            raise EmptyRangeError(f"k_max={k_max} < k_min={k_min} for n={n}")
        return cls(tuple(range(int(k_min), k_max + 1)))

    def check(self, n: int) -> None:
        if self.values[-1] >= n:
            raise InsufficientDataError(f"k grid reaches {self.values[-1]} but n={n}")


def tail_scores(view: TailView, rule: ScoreRule, gammas: Sequence[float]) -> np.ndarray:
    """Empirical tail score of Pareto(gamma) on ``view`` for every gamma in ``gammas``."""
    g = np.asarray(gammas, dtype=float)
    if rule.kind == "logs":
        # mean(-log g - (1/g + 1) log z) over the view
        return -np.log(g) - (1.0 / g + 1.0) * float(np.mean(view.log_ratios))
    for gi in g:
        rule.check(gi)
    kern = DistanceKernel(view.ratios, rule.beta)
    pairs = np.array([pair_difference(gi, rule.beta) for gi in g])
    return 0.5 * pairs - kern.mean_expected(g)


def empirical_tail_score(view: TailView, rule: ScoreRule, candidate: ParetoCandidate) -> float:
    return float(tail_scores(view, rule, [candidate.gamma])[0])


def _z_level(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise TailRankError(f"level must lie in (0, 1), got {level}")
    return float(stats.norm.ppf(0.5 + level / 2.0))


def score_ci(
    score: float, candidate: ParetoCandidate, k: int, level: float = 0.95, rule: ScoreRule = LOGS
) -> tuple[float, float]:
    """Pointwise normal interval for an empirical tail score.

    The asymptotic variance is evaluated with the true tail index set equal to the
    candidate's own. Only LogS and CRPS (beta = 1) have a closed-form variance.
    """
    if k < 1:
        raise TailRankError("k must be positive")
    g = candidate.gamma
    if rule.kind == "logs":
        sigma = math.sqrt(var_logs(g, g))
    elif rule.beta == 1.0:
        sigma = math.sqrt(var_es1(g, g))
    else:
        raise TailRankError(f"no closed-form score variance for {rule.label}")
    half = _z_level(level) * sigma / math.sqrt(k)
    return score - half, score + half


@dataclass(frozen=True)
class ScoreCurve:
    candidate: ParetoCandidate
    rule: ScoreRule
    ks: np.ndarray
    scores: np.ndarray
    ci_half_widths: np.ndarray | None = None

    @property
    def points(self) -> list[tuple[int, float, float | None]]:
        hw = self.ci_half_widths
        return [
            (int(k), float(s), None if hw is None else float(hw[i]))
            for i, (k, s) in enumerate(zip(self.ks, self.scores))
        ]

    def at(self, k: int) -> float:
        idx = np.flatnonzero(self.ks == k)
        if idx.size == 0:
            raise MissingPointError(f"curve for gamma={self.candidate.gamma} has no k={k}")
        return float(self.scores[idx[0]])


def score_curve(
    sample: Sample,
    grid: KGrid,
    candidates: Sequence[ParetoCandidate],
    rule: ScoreRule = LOGS,
    with_ci: bool = False,
    level: float = 0.95,
) -> list[ScoreCurve]:
    """One score curve per candidate over ``grid``."""
    grid.check(sample.n)
    ks = np.array(grid.values)
    gammas = [c.gamma for c in candidates]
    table = np.array([tail_scores(v, rule, gammas) for v in tail_views(sample, ks)])
    curves = []
    for j, cand in enumerate(candidates):
        hw = None
        if with_ci:
            hw = np.array([score_ci(0.0, cand, int(k), level, rule)[1] for k in ks])
        curves.append(ScoreCurve(cand, rule, ks.copy(), table[:, j].copy(), hw))
    return curves


@dataclass(frozen=True)
class LowerFraction:
    fraction: float


@dataclass(frozen=True)
class Explicit:
    values: tuple[int, ...]


def select_stability_range(grid: KGrid, policy: LowerFraction | Explicit) -> tuple[int, ...]:
    if isinstance(policy, LowerFraction):
        f = float(policy.fraction)
        if not 0.0 < f <= 1.0:
            raise EmptyRangeError(f"stability fraction must lie in (0, 1], got {f}")
        m = math.ceil(f * len(grid) - 1e-12)
        out = grid.values[:m]
    else:
        wanted = tuple(sorted(set(int(k) for k in policy.values)))
        missing = set(wanted) - set(grid.values)
        if missing:
            raise EmptyRangeError(f"explicit stability values not on the grid: {sorted(missing)}")
        out = wanted
    if not out:
        raise EmptyRangeError("stability range is empty")
    return tuple(out)


@dataclass(frozen=True)
class RankingReport:
    stability_range: tuple[int, ...]
    mean_scores: dict[float, float]
    order: tuple[float, ...]

    @property
    def best(self) -> float:
        return self.order[0]


def rank_candidates(curves: Sequence[ScoreCurve], stability: Sequence[int]) -> RankingReport:
    """Average each curve over ``stability`` and sort descending; exact ties go to smaller gamma."""
    stab = tuple(int(k) for k in stability)
    if not stab:
        raise EmptyRangeError("stability range is empty")
    means = {}
    for c in curves:
        pos = {int(k): i for i, k in enumerate(c.ks)}
        gap = [k for k in stab if k not in pos]
        if gap:
            raise MissingPointError(f"curve for gamma={c.candidate.gamma} misses k={gap[:5]}")
        means[c.candidate.gamma] = float(np.mean(c.scores[[pos[k] for k in stab]]))
    order = tuple(sorted(means, key=lambda g: (-means[g], g)))
    return RankingReport(stab, means, order)


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def curves_to_csv(curves: Sequence[ScoreCurve], reference: float | None = None) -> str:
    """CSV text with columns k, candidate_gamma, score, ci_low, ci_high.

    CI columns are filled for curves that carry half-widths; with ``reference`` set,
    only the candidate with that gamma gets them.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "candidate_gamma", "score", "ci_low", "ci_high"])
    for c in curves:
        show = c.ci_half_widths is not None and (reference is None or c.candidate.gamma == reference)
        for i, (k, s) in enumerate(zip(c.ks, c.scores)):
            lo = hi = None
            if show:
                lo, hi = s - c.ci_half_widths[i], s + c.ci_half_widths[i]
            w.writerow([int(k), _num(c.candidate.gamma), _num(s), _num(lo), _num(hi)])
    return buf.getvalue()


def curves_to_json(curves: Sequence[ScoreCurve]) -> str:
    doc = [
        {
            "candidate_gamma": c.candidate.gamma,
            "rule": c.rule.label,
            "points": [{"k": k, "score": s, "ci_half_width": h} for k, s, h in c.points],
        }
        for c in curves
    ]
    return json.dumps(doc, indent=1)


def ranking_to_json(report: RankingReport) -> str:
    doc = {
        "stability_range": list(report.stability_range),
        "mean_scores": [{"candidate_gamma": g, "mean_score": report.mean_scores[g]} for g in report.order],
        "order": list(report.order),
    }
    return json.dumps(doc, indent=1)
