"""Seeded Monte Carlo experiments: ranking proportions, estimator bias/variance, CI coverage.

Replication r at sample-size index i always draws from the Philox stream
``(base_seed, i, r)``, so results depend only on the ExperimentSpec and never on how the
replications are scheduled across worker processes.
"""
from __future__ import annotations

import csv
import datetime
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .distributions import (
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
from .errors import ConfigError
from .estimators import GammaGrid, beta_schedule, hill, score_opt_estimate
from .scoring import LOGS, ScoreRule, expected_logs
from .tailscore import KGrid, _views_from_sorted, normalized_exceedances, score_ci, tail_scores

__all__ = [
    "DGP",
    "KRecipe",
    "ExperimentSpec",
    "ProportionCurve",
    "BiasVarianceCell",
    "run_ranking_experiment",
    "run_estimator_experiment",
    "run_coverage_check",
    "load_config",
    "cells_to_csv",
    "proportions_to_csv",
    "experiment_manifest",
]


@dataclass(frozen=True)
class DGP:
    """Data-generating law: ``frechet``, ``burr`` (with shape t) or exact ``pareto``."""

    family: str
    gamma: float
    t: float = 1.0

    def __post_init__(self):
        fam = str(self.family).lower()
        if fam not in ("frechet", "burr", "pareto"):
            raise ConfigError(f"dgp.family must be frechet, burr or pareto, got {self.family!r}")
        if not float(self.gamma) > 0.0:
            raise ConfigError(f"dgp.gamma must be positive, got {self.gamma!r}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "t", float(self.t))

    def sample(self, n: int, seed: int, stream: Sequence[int]) -> Sample:
        if self.family == "frechet":
            return sample_frechet(FrechetLaw.from_gamma(self.gamma), n, seed, stream)
        if self.family == "burr":
            return sample_burr(BurrLaw.from_gamma(self.gamma, self.t), n, seed, stream)
        return sample_pareto(ParetoCandidate(self.gamma), n, seed, stream)


@dataclass(frozen=True)
class KRecipe:
    """How to build the k grid for a given n."""

    kind: str = "evenly_spaced"
    k_min: int = 50
    points: int = 100
    k_max_fraction: float = 0.25

    def __post_init__(self):
        if self.kind not in ("evenly_spaced", "all_integers"):
            raise ConfigError(f"k_grid.kind must be evenly_spaced or all_integers, got {self.kind!r}")

    def grid(self, n: int) -> KGrid:
        k_max = int(math.floor(self.k_max_fraction * n))
        if self.kind == "all_integers":
            return KGrid.all_integers(n, self.k_min, k_max)
        return KGrid.evenly_spaced(n, self.k_min, k_max, self.points)


@dataclass(frozen=True)
class ExperimentSpec:
    dgp: DGP
    n_values: tuple[int, ...]
    candidates: tuple[ParetoCandidate, ...] = ()
    rule: ScoreRule = LOGS
    scaling: ScalingKind = ScalingKind.NONE
    k_policy: KRecipe = field(default_factory=KRecipe)
    replications: int = 100
    base_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "scaling", ScalingKind(self.scaling))
        if int(self.replications) < 1:
            raise ConfigError("replications must be at least 1")
        if not self.n_values or min(self.n_values) < 2:
            raise ConfigError("n_values must be a nonempty list of counts >= 2")
        if int(self.workers) < 1:
            raise ConfigError("workers must be at least 1")

    def draw(self, n_index: int, rep: int) -> Sample:
        s = self.dgp.sample(self.n_values[n_index], self.base_seed, (n_index, rep))
        return apply_scaling(s, self.scaling)

    def to_dict(self) -> dict:
        return {
            "dgp": {"family": self.dgp.family, "gamma": self.dgp.gamma, "t": self.dgp.t},
            "n_values": list(self.n_values),
            "candidates": [c.gamma for c in self.candidates],
            "rule": self.rule.label,
            "scaling": self.scaling.value,
            "k_grid": {
                "kind": self.k_policy.kind,
                "k_min": self.k_policy.k_min,
                "points": self.k_policy.points,
                "k_max_fraction": self.k_policy.k_max_fraction,
            },
            "replications": int(self.replications),
            "base_seed": int(self.base_seed),
            "workers": int(self.workers),
        }


@dataclass(frozen=True)
class ProportionCurve:
    n: int
    points: tuple[tuple[float, float], ...]
    ks: tuple[int, ...] = ()

    def proportions(self) -> np.ndarray:
        return np.array([p for _, p in self.points])


@dataclass(frozen=True)
class BiasVarianceCell:
    method: str
    gamma_true: float
    k_fraction: float
    bias: float
    variance: float | None
    n: int = 0
    k: int = 0
    replications: int = 0


def _map(fn, tasks, workers):
    """Order-preserving map; parallel runs return exactly what the serial loop would."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _ranking_rep(task):
    spec, i, rep = task
    sample = spec.draw(i, rep)
    ks = spec.k_policy.grid(spec.n_values[i]).values
    gammas = [c.gamma for c in spec.candidates]
    views = _views_from_sorted(sample.sorted_values(), ks)
    table = np.array([tail_scores(v, spec.rule, gammas) for v in views])
    return np.argmax(table, axis=1)  # first maximum: ties go to the earlier candidate


def run_ranking_experiment(spec: ExperimentSpec) -> list[ProportionCurve]:
    """Share of replications in which the candidate equal to the DGP's gamma scores best, per k."""
    if not spec.candidates:
        raise ConfigError("ranking experiments need at least one candidate")
    gammas = [c.gamma for c in spec.candidates]
    # candidates are sorted so argmax ties resolve to the smaller gamma
    order = sorted(range(len(gammas)), key=lambda j: gammas[j])
    spec = _with(spec, candidates=tuple(spec.candidates[j] for j in order))
    gammas = [c.gamma for c in spec.candidates]
    hits = [j for j, g in enumerate(gammas) if math.isclose(g, spec.dgp.gamma, rel_tol=1e-12)]
    if not hits:
        raise ConfigError(f"no candidate equals the true gamma {spec.dgp.gamma}")
    target = hits[0]
    out = []
    for i, n in enumerate(spec.n_values):
        ks = spec.k_policy.grid(n).values
        tasks = [(spec, i, r) for r in range(spec.replications)]
        winners = np.array(_map(_ranking_rep, tasks, spec.workers))
        prop = np.mean(winners == target, axis=0)
        out.append(ProportionCurve(n, tuple((k / n, float(p)) for k, p in zip(ks, prop)), tuple(ks)))
    return out


def _estimator_rep(task):
    spec, i, rep, ks, rules, grid = task
    sample = spec.draw(i, rep)
    views = _views_from_sorted(sample.sorted_values(), ks)
    row = []
    for v in views:
        row.append([hill(v)] + [score_opt_estimate(v, r, grid).gamma_hat for r in rules])
    return np.array(row)


def _estimator_rules(spec: ExperimentSpec, beta_schedule_flag: bool) -> list[ScoreRule]:
    if beta_schedule_flag:
        return [ScoreRule.energy(b) for b in beta_schedule(spec.dgp.gamma)]
    if spec.rule.kind == "es":
        return [spec.rule]
    return []


def run_estimator_experiment(
    spec: ExperimentSpec, k_fractions: Sequence[float], beta_schedule_flag: bool = True
) -> list[BiasVarianceCell]:
    """Bias and sample variance (ddof 1) of Hill and grid-search ES estimators at k = floor(f n).

    With ``beta_schedule_flag`` the ES estimators use the three betas of ``beta_schedule``;
    otherwise only ``spec.rule`` is added when it is an energy score. The candidate grid
    is 150 points on [0.8, 2] times the true gamma. Variance is None for one replication.
    """
    fracs = [float(f) for f in k_fractions]
    if any(not 0.0 < f < 1.0 for f in fracs):
        raise ConfigError(f"k_fractions must lie in (0, 1), got {fracs}")
    rules = _estimator_rules(spec, beta_schedule_flag)
    methods = ["hill"] + [r.label for r in rules]
    grid = GammaGrid.around(spec.dgp.gamma)
    cells = []
    for i, n in enumerate(spec.n_values):
        ks = [int(math.floor(f * n)) for f in fracs]
        if min(ks) < 2:
            raise ConfigError(f"k = floor(fraction * n) must be >= 2 for n={n}")
        tasks = [(spec, i, r, ks, rules, grid) for r in range(spec.replications)]
        est = np.array(_map(_estimator_rep, tasks, spec.workers))  # reps x k x methods
        m = est.shape[0]
        for a, f in enumerate(fracs):
            for b, meth in enumerate(methods):
                x = est[:, a, b]
                var = float(np.var(x, ddof=1)) if m > 1 else None
                cells.append(
                    BiasVarianceCell(meth, spec.dgp.gamma, f, float(np.mean(x)) - spec.dgp.gamma, var, n, ks[a], m)
                )
    return cells


def run_coverage_check(gamma: float, n: int, k: int, replications: int, base_seed: int) -> float:
    """Fraction of exact-Pareto replications whose 95% LogS interval covers the expected score."""
    cand = ParetoCandidate(gamma)
    target = expected_logs(gamma, gamma)
    covered = 0
    for r in range(int(replications)):
        view = normalized_exceedances(sample_pareto(cand, n, base_seed, (0, r)), k)
        s = float(tail_scores(view, LOGS, [gamma])[0])
        lo, hi = score_ci(s, cand, k)
        covered += lo <= target <= hi
    return covered / int(replications)


def _with(spec: ExperimentSpec, **changes) -> ExperimentSpec:
    d = {f: getattr(spec, f) for f in spec.__dataclass_fields__}
    d.update(changes)
    return ExperimentSpec(**d)


# ---------------------------------------------------------------- config

_TOP_KEYS = {
    "experiment", "dgp", "n_values", "candidates", "rule", "scaling", "k_grid",
    "replications", "base_seed", "workers", "k_fractions", "beta_schedule",
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    specs: tuple[ExperimentSpec, ...]
    k_fractions: tuple[float, ...] = ()
    beta_schedule: bool = True


def _need(d, key, where):
    if key not in d:
        raise ConfigError(f"missing required key {where}{key}")
    return d[key]


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a config mapping. A list under ``dgp.gamma`` expands into one spec per value."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping at the top level")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {unknown}")
    kind = str(doc.get("experiment", "ranking"))
    if kind not in ("ranking", "estimator"):
        raise ConfigError(f"key 'experiment' must be ranking or estimator, got {kind!r}")
    dgp = _need(doc, "dgp", "")
    if not isinstance(dgp, dict):
        raise ConfigError("key 'dgp' must be a mapping")
    family = _need(dgp, "family", "dgp.")
    gammas = _as_list(_need(dgp, "gamma", "dgp."))
    try:
        n_values = [int(n) for n in _as_list(_need(doc, "n_values", ""))]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"key 'n_values' must hold integers: {e}") from None
    try:
        rule = ScoreRule.parse(str(doc.get("rule", "logs")))
    except ValueError as e:
        raise ConfigError(f"key 'rule': {e}") from None
    try:
        scaling = ScalingKind(str(doc.get("scaling", "none")))
    except ValueError:
        raise ConfigError(f"key 'scaling' must be none, linear or sinusoidal, got {doc.get('scaling')!r}") from None
    kg = doc.get("k_grid", {}) or {}
    if not isinstance(kg, dict):
        raise ConfigError("key 'k_grid' must be a mapping")
    extra = sorted(set(kg) - {"kind", "k_min", "points", "k_max_fraction"})
    if extra:
        raise ConfigError(f"unknown k_grid key(s): {extra}")
    recipe = KRecipe(**kg)
    try:
        cands = tuple(ParetoCandidate(float(g)) for g in _as_list(doc.get("candidates", [])))
    except ValueError as e:
        raise ConfigError(f"key 'candidates': {e}") from None
    if kind == "ranking" and not cands:
        raise ConfigError("key 'candidates' is required for ranking experiments")
    specs = []
    for g in gammas:
        try:
            specs.append(
                ExperimentSpec(
                    dgp=DGP(family, float(g), float(dgp.get("t", 1.0))),
                    n_values=tuple(n_values),
                    candidates=cands,
                    rule=rule,
                    scaling=scaling,
                    k_policy=recipe,
                    replications=int(doc.get("replications", 100)),
                    base_seed=int(doc.get("base_seed", 0)),
                    workers=int(doc.get("workers", 1)),
                )
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None
    fracs = tuple(float(f) for f in _as_list(doc.get("k_fractions", [])))
    if kind == "estimator" and not fracs:
        raise ConfigError("key 'k_fractions' is required for estimator experiments")
    return ExperimentConfig(kind, tuple(specs), fracs, bool(doc.get("beta_schedule", True)))


def load_config(path) -> ExperimentConfig:
    """Read a YAML (or JSON, which is YAML) experiment config."""
    import yaml

    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse config {path}: {e}") from None
    return parse_config(doc)


# ---------------------------------------------------------------- output


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def cells_to_csv(cells: Sequence[BiasVarianceCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "gamma_true", "n", "k_fraction", "k", "replications", "bias", "variance"])
    for c in cells:
        w.writerow([c.method, _num(c.gamma_true), c.n, _num(c.k_fraction), c.k, c.replications, _num(c.bias), _num(c.variance)])
    return buf.getvalue()


def proportions_to_csv(curves: Sequence[ProportionCurve], gamma_true: float | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["gamma_true", "n", "k", "k_over_n", "proportion"])
    for c in curves:
        for k, (kn, p) in zip(c.ks, c.points):
            w.writerow([_num(gamma_true), c.n, k, _num(kn), _num(p)])
    return buf.getvalue()


def experiment_manifest(config: ExperimentConfig, outputs: Sequence[str], command: str = "experiment") -> str:
    doc = {
        "command": command,
        "experiment": config.kind,
        "k_fractions": list(config.k_fractions),
        "beta_schedule": config.beta_schedule,
        "specs": [s.to_dict() for s in config.specs],
        "seed_streams": "(base_seed, n_index, replication_index)",
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "outputs": list(outputs),
    }
    return json.dumps(doc, indent=1)
