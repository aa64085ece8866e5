"""Command-line interface: ``tailrank {score,estimate,experiment,simulate}``.

Every subcommand computes all of its outputs in memory first and only then writes
them, followed by a ``manifest.json``; on error nothing is written and the exit
status is nonzero.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import ParetoCandidate, Sample, ScalingKind
from .errors import DataError, EmptySubsetError, SchemaError, TailRankError
from .estimators import GammaGrid, hill, hill_trace, score_opt_estimate, traces_to_csv
from .montecarlo import (
    DGP,
    cells_to_csv,
    experiment_manifest,
    load_config,
    proportions_to_csv,
    run_estimator_experiment,
    run_ranking_experiment,
)
from .scoring import ScoreRule
from .tailscore import (
    KGrid,
    LowerFraction,
    curves_to_csv,
    curves_to_json,
    rank_candidates,
    ranking_to_json,
    score_curve,
    select_stability_range,
    tail_views,
)

MISSING = ("", "NA")


@dataclass(frozen=True)
class DatasetSpec:
    path: str
    value_column: str
    filter: tuple[str, str] | None = None
    drop_missing: bool = False


def ingest(spec: DatasetSpec) -> Sample:
    """Read positive values of ``value_column`` from a comma-separated file with a header.

    Rows failing the filter are skipped; a missing filter value never matches. With
    ``drop_missing`` rows whose value is missing are skipped, otherwise they are an error.
    Row numbers in messages count the header as line 1.
    """
    path = Path(spec.path)
    if not path.is_file():
        raise DataError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path} is empty")
        header = [h.strip() for h in header]
        cols = {name: i for i, name in enumerate(header)}
        if spec.value_column not in cols:
            raise SchemaError(f"column {spec.value_column!r} not in header {header}")
        vi = cols[spec.value_column]
        fi = None
        if spec.filter is not None:
            if spec.filter[0] not in cols:
                raise SchemaError(f"filter column {spec.filter[0]!r} not in header {header}")
            fi = cols[spec.filter[0]]
        values = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"row {line}: expected {len(header)} fields, got {len(row)}")
            if fi is not None and row[fi].strip() != spec.filter[1]:
                continue
            raw = row[vi].strip()
            if raw in MISSING:
                if spec.drop_missing:
                    continue
                raise DataError(f"row {line}: missing value in {spec.value_column!r}")
            try:
                x = float(raw)
            except ValueError:
                raise DataError(f"row {line}: cannot parse {raw!r} as a number") from None
            if not (math.isfinite(x) and x > 0.0):
                raise DataError(f"row {line}: value {raw!r} is not strictly positive")
            values.append(x)
    if not values:
        raise EmptySubsetError("no observations left after filtering")
    label = path.name if spec.filter is None else f"{path.name}[{spec.filter[0]}={spec.filter[1]}]"
    return Sample(np.array(values), dgp_label=label)


def _parse_filter(text):
    if text is None:
        return None
    col, sep, val = text.partition("=")
    if not sep or not col:
        raise argparse.ArgumentTypeError(f"filter must look like COL=VAL, got {text!r}")
    return col.strip(), val.strip()


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _rule(text):
    try:
        return ScoreRule.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _k_grid(args, n: int) -> KGrid:
    if getattr(args, "k_list", None):
        return KGrid(tuple(sorted(set(args.k_list))))
    k_max = args.k_max if args.k_max is not None else n // 4
    if args.k_points is not None and not args.k_all_integers:
        return KGrid.evenly_spaced(n, args.k_min, k_max, args.k_points)
    return KGrid.all_integers(n, args.k_min, k_max)


def _write_outputs(out_dir: Path, files: dict[str, str]) -> list[str]:
    """Write every file through a temporary name so a failure leaves no partial output."""
    out_dir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, out_dir / name))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, dest in staged:
        os.replace(tmp, dest)
    return [str(dest) for _, dest in staged]


def _manifest(command: str, config: dict, seed, outputs) -> str:
    doc = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "outputs": list(outputs),
    }
    return json.dumps(doc, indent=1)


def _finish(args, command, config, seed, files):
    out_dir = Path(args.out_dir)
    names = list(files)
    files = dict(files)
    files["manifest.json"] = _manifest(command, config, seed, [str(out_dir / f) for f in names])
    _write_outputs(out_dir, files)
    for name in files:
        print(out_dir / name)


def _dataset_config(args) -> dict:
    return {
        "input": os.path.abspath(args.input),
        "value_column": args.value_column,
        "filter": None if args.filter is None else "=".join(args.filter),
        "drop_missing": args.drop_missing,
    }


def cmd_score(args) -> None:
    sample = ingest(DatasetSpec(args.input, args.value_column, args.filter, args.drop_missing))
    grid = _k_grid(args, sample.n)
    cands = [ParetoCandidate(g) for g in args.candidates]
    curves = score_curve(sample, grid, cands, args.rule, with_ci=args.rule.kind == "logs")
    stab = select_stability_range(grid, LowerFraction(args.stability_fraction))
    report = rank_candidates(curves, stab)
    if args.format == "json":
        files = {"score_curves.json": curves_to_json(curves)}
    else:
        files = {"score_curves.csv": curves_to_csv(curves, reference=args.reference_gamma)}
    files["ranking.json"] = ranking_to_json(report)
    config = _dataset_config(args) | {
        "n": sample.n,
        "candidates": args.candidates,
        "rule": args.rule.label,
        "k_grid": list(grid.values),
        "stability_fraction": args.stability_fraction,
        "reference_gamma": args.reference_gamma,
        "format": args.format,
    }
    _finish(args, "score", config, None, files)


def cmd_estimate(args) -> None:
    sample = ingest(DatasetSpec(args.input, args.value_column, args.filter, args.drop_missing))
    grid = _k_grid(args, sample.n)
    grid.check(sample.n)
    views = tail_views(sample, grid.values)
    traces = []
    gamma_grid = None
    if args.method in ("hill", "both"):
        traces += [hill_trace(v) for v in views]
    if args.method in ("scoreopt", "both"):
        if args.grid_lo is not None and args.grid_hi is not None:
            gamma_grid = GammaGrid.linspace(args.grid_lo, args.grid_hi, args.grid_points)
        else:
            # pilot: Hill at the middle of the k grid
            pilot = hill(views[len(views) // 2])
            lo = args.grid_lo if args.grid_lo is not None else 0.8 * pilot
            hi = args.grid_hi if args.grid_hi is not None else 2.0 * pilot
            gamma_grid = GammaGrid.linspace(lo, hi, args.grid_points)
        traces += [score_opt_estimate(v, args.rule, gamma_grid) for v in views]
    if args.format == "json":
        doc = [t.__dict__ for t in traces]
        files = {"estimates.json": json.dumps(doc, indent=1)}
    else:
        files = {"estimates.csv": traces_to_csv(traces)}
    config = _dataset_config(args) | {
        "n": sample.n,
        "method": args.method,
        "rule": args.rule.label,
        "k_grid": list(grid.values),
        "gamma_grid": None
        if gamma_grid is None
        else {"lower": gamma_grid.bounds[0], "upper": gamma_grid.bounds[1], "points": int(gamma_grid.values.size)},
        "format": args.format,
    }
    _finish(args, "estimate", config, None, files)


def cmd_experiment(args) -> None:
    cfg = load_config(args.config)
    if cfg.kind == "estimator":
        cells = []
        for spec in cfg.specs:
            cells += run_estimator_experiment(spec, cfg.k_fractions, cfg.beta_schedule)
        files = {"bias_variance.csv": cells_to_csv(cells)}
    else:
        text = ""
        for spec in cfg.specs:
            part = proportions_to_csv(run_ranking_experiment(spec), spec.dgp.gamma)
            text += part if not text else part.split("\n", 1)[1]
        files = {"proportions.csv": text}
    out_dir = Path(args.out_dir)
    names = [str(out_dir / f) for f in files]
    files["manifest.json"] = experiment_manifest(cfg, names)
    _write_outputs(out_dir, files)
    for name in files:
        print(out_dir / name)


def cmd_simulate(args) -> None:
    dgp = DGP(args.dgp, args.gamma, args.t)
    sample = dgp.sample(args.n, args.seed, ())
    if args.scaling != "none":
        from .distributions import apply_scaling

        sample = apply_scaling(sample, ScalingKind(args.scaling))
    lines = ["value"] + [repr(float(x)) for x in sample.values]
    files = {args.name: "\n".join(lines) + "\n"}
    config = {"dgp": args.dgp, "gamma": args.gamma, "t": args.t, "n": args.n, "scaling": args.scaling}
    _finish(args, "simulate", config, args.seed, files)


def _add_dataset(p):
    p.add_argument("--input", required=True, help="comma-separated file with a header row")
    p.add_argument("--value-column", required=True)
    p.add_argument("--filter", type=_parse_filter, default=None, metavar="COL=VAL")
    p.add_argument("--drop-missing", action="store_true", help="skip rows with an empty or NA value")


def _add_k(p):
    p.add_argument("--k-min", type=int, default=10)
    p.add_argument("--k-max", type=int, default=None, help="default floor(n/4)")
    p.add_argument("--k-points", type=int, default=None, help="evenly spaced grid of this many points")
    p.add_argument("--k-all-integers", action="store_true", help="every integer in [k-min, k-max] (default)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tailrank", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score curves, ranking and CIs for Pareto candidates")
    _add_dataset(p)
    p.add_argument("--candidates", type=_floats, default=[0.8, 1.0, 1.2, 1.5])
    p.add_argument("--rule", type=_rule, default=ScoreRule("logs"), help="logs, crps or es:<beta>")
    _add_k(p)
    p.add_argument("--stability-fraction", type=float, default=0.25)
    p.add_argument("--reference-gamma", type=float, default=1.0, help="candidate that gets CI columns")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("estimate", help="Hill and grid-search score estimates over k")
    _add_dataset(p)
    p.add_argument("--method", choices=["hill", "scoreopt", "both"], default="both")
    p.add_argument("--rule", type=_rule, default=ScoreRule("logs"))
    _add_k(p)
    p.add_argument("--k-list", type=_ints, default=None, help="explicit comma-separated k values")
    p.add_argument("--grid-lo", type=float, default=None)
    p.add_argument("--grid-hi", type=float, default=None)
    p.add_argument("--grid-points", type=int, default=150)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("simulate", help="write a synthetic sample to CSV")
    p.add_argument("--dgp", choices=["pareto", "frechet", "burr"], default="pareto")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0, help="Burr shape t")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--scaling", choices=[k.value for k in ScalingKind], default="none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default="sample.csv")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (TailRankError, OSError) as e:
        print(f"tailrank {args.command}: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
