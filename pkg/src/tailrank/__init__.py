"""Rank Pareto tail models with proper scoring rules and estimate tail indices."""

__version__ = "0.1.0"

from .distributions import (  # noqa: E402
    BurrLaw,
    FrechetLaw,
    ParetoCandidate,
    Sample,
    ScalingKind,
    apply_scaling,
    sample_burr,
    sample_frechet,
    sample_pareto,
)
from .errors import TailRankError  # noqa: E402
from .estimators import GammaGrid, hill, score_opt_estimate  # noqa: E402
from .scoring import LOGS, ScoreRule, es_beta_pareto, logs_pareto  # noqa: E402
from .tailscore import (  # noqa: E402
    KGrid,
    LowerFraction,
    rank_candidates,
    score_curve,
    select_stability_range,
    tail_views,
)

__all__ = [
    "BurrLaw",
    "FrechetLaw",
    "ParetoCandidate",
    "Sample",
    "ScalingKind",
    "apply_scaling",
    "sample_burr",
    "sample_frechet",
    "sample_pareto",
    "TailRankError",
    "GammaGrid",
    "hill",
    "score_opt_estimate",
    "LOGS",
    "ScoreRule",
    "es_beta_pareto",
    "logs_pareto",
    "KGrid",
    "LowerFraction",
    "rank_candidates",
    "score_curve",
    "select_stability_range",
    "tail_views",
]
