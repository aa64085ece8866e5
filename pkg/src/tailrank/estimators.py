"""Tail-index estimators: Hill and grid search over the empirical tail score."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidBetaError, InvalidGammaError, InvalidViewError
from .scoring import LOGS, ScoreRule
from .tailscore import TailView, tail_scores

__all__ = [
    "GammaGrid",
    "EstimateTrace",
    "hill",
    "score_opt_estimate",
    "logs_objective_stationarity",
    "beta_schedule",
    "hill_trace",
    "traces_to_csv",
]


@dataclass(frozen=True)
class GammaGrid:
    """Finite candidate set of tail indices inside [lower, upper]."""

    values: np.ndarray
    bounds: tuple[float, float]

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        lo, hi = map(float, self.bounds)
        if v.size == 0:
            raise InvalidGammaError("gamma grid is empty")
        if np.any(np.diff(v) <= 0.0):
            raise InvalidGammaError("gamma grid must be strictly increasing")
        if not (0.0 < lo <= v[0] and v[-1] <= hi):
            raise InvalidGammaError("gamma grid must lie inside 0 < lower <= min <= max <= upper")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "bounds", (lo, hi))

    @classmethod
    def linspace(cls, lower: float, upper: float, points: int = 150) -> "GammaGrid":
        return cls(np.linspace(lower, upper, int(points)), (lower, upper))

    @classmethod
    def around(cls, gamma_ref: float, points: int = 150) -> "GammaGrid":
        """Default grid: ``points`` equidistant values on [0.8, 2] * gamma_ref."""
        if not gamma_ref > 0.0:
            raise InvalidGammaError(f"reference gamma must be positive, got {gamma_ref}")
        return cls.linspace(0.8 * gamma_ref, 2.0 * gamma_ref, points)

    @property
    def step(self) -> float:
        return float(np.max(np.diff(self.values))) if self.values.size > 1 else 0.0


@dataclass(frozen=True)
class EstimateTrace:
    k: int
    gamma_hat: float
    objective: float
    method: str
    beta: float | None = None
    boundary: bool = False


def hill(view: TailView) -> float:
    """Mean log of the normalized exceedances."""
    if view.k < 1:
        raise InvalidViewError("view has no exceedances")
    if np.any(view.ratios < 1.0):
        raise InvalidViewError("normalized exceedances must be >= 1")
    return float(np.mean(view.log_ratios))


def logs_objective_stationarity(view: TailView, gamma: float) -> float:
    """Derivative in gamma of the mean Pareto log score over the view."""
    return -1.0 / gamma + float(np.mean(view.log_ratios)) / gamma ** 2


def score_opt_estimate(view: TailView, rule: ScoreRule, grid: GammaGrid) -> EstimateTrace:
    """Exhaustive argmax of the empirical tail score over ``grid``; ties go to smaller gamma."""
    if rule.kind == "es" and rule.beta >= 1.0 / grid.bounds[1]:
        raise InvalidBetaError(
            f"ES_beta estimation needs beta < 1/upper = {1.0 / grid.bounds[1]:.6g}, got {rule.beta}"
        )
    obj = tail_scores(view, rule, grid.values)
    i = int(np.argmax(obj))  # first maximum, i.e. smallest gamma among exact ties
    return EstimateTrace(
        k=view.k,
        gamma_hat=float(grid.values[i]),
        objective=float(obj[i]),
        method=rule.label,
        beta=rule.beta,
        boundary=i in (0, grid.values.size - 1),
    )


def beta_schedule(gamma_true: float) -> tuple[float, float, float]:
    b1 = 1.0 / (2.0 * gamma_true) - 0.001
    if not b1 > 0.0:
        raise InvalidGammaError(f"beta schedule needs 1/(2 gamma) > 0.001, got gamma={gamma_true}")
    return b1, 0.8 * b1, 0.7 * b1


def hill_trace(view: TailView) -> EstimateTrace:
    g = hill(view)
    obj = float(tail_scores(view, LOGS, [g])[0]) if g > 0.0 else -math.inf
    return EstimateTrace(k=view.k, gamma_hat=g, objective=obj, method="hill")


def traces_to_csv(traces: Sequence[EstimateTrace]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "beta", "k", "gamma_hat", "objective", "boundary_flag"])
    for t in traces:
        w.writerow(
            [
                t.method,
                "" if t.beta is None else repr(t.beta),
                t.k,
                repr(t.gamma_hat),
                repr(t.objective),
                int(t.boundary),
            ]
        )
    return buf.getvalue()
