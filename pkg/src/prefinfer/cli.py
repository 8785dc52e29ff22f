"""Command-line pipeline: simulate, fit, aggregate, polarize, predict, validate.

All stages share one output directory; downstream stages read the fit
artifact from ``<out>/fit/fit.json``. Every stage is deterministic given its
inputs and ``--seed``: chain generators, moment draws, and EM sample draws
are all derived from that one seed with fixed per-purpose labels. The
``PREF_INFER_THREADS`` environment variable caps chain-level parallelism.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import aggregate as agg
from . import predict as pred
from .components import ComponentFamily, ComponentParams
from .errors import MissingArtifactError, PrefInferError
from .ingest import load_boundaries, load_candidates, load_centers, load_elections, link_districts
from .model import MixtureParams, build_precinct_data
from .polarization import polarization_report
from .sampler import ChainConfig, FitResult, fit as run_fit, load_fit, save_fit
from .synthetic import BimodalPrecinct, SyntheticSpec, generate, write_dataset

# fixed labels deriving per-purpose generators from the one user seed
_SEED_POLARIZE = 9001
_SEED_SIMULATE = 9002


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _family(text) -> ComponentFamily:
    try:
        return ComponentFamily(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"family must be one of normal, laplace, uniform; got {text}"
        ) from None


def _max_workers() -> int:
    raw = os.environ.get("PREF_INFER_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _write_json(doc, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_linked(args):
    """Load candidates and elections, linking districts when geometry given."""
    candidates = load_candidates(args.candidates)
    elections, skipped = load_elections(args.elections, candidates)
    unmatched = []
    if args.centers and args.districts:
        centers = load_centers(args.centers)
        boundaries = load_boundaries(args.districts)
        elections, unmatched = link_districts(elections, centers, boundaries)
    return candidates, elections, skipped, unmatched


def _fit_path(out: Path) -> Path:
    path = out / "fit" / "fit.json"
    if not path.exists():
        raise MissingArtifactError(f"missing fit artifact at {path}; run 'fit' first")
    return path


def cmd_fit(args) -> int:
    out = Path(args.out)
    candidates, elections, skipped, unmatched = _load_linked(args)
    data = build_precinct_data(elections, candidates)
    config = ChainConfig(
        k=args.k,
        family=args.family,
        iterations=args.iters,
        step_size=args.step_size,
        chains=args.chains,
        seed=args.seed,
    )
    result = run_fit(config, data, max_workers=_max_workers())
    fit_dir = out / "fit"
    fit_dir.mkdir(parents=True, exist_ok=True)
    save_fit(result, fit_dir / "fit.json")
    _write_json({"skipped": skipped, "unmatched": unmatched}, fit_dir / "skip_report.json")
    with open(fit_dir / "fit.log", "w", encoding="utf-8") as fh:
        fh.write(
            f"k={config.k} family={config.family.value} chains={config.chains} "
            f"iterations={config.iterations} step_size={config.step_size} seed={config.seed}\n"
        )
        fh.write(f"precincts={len(data)} skipped={skipped} unmatched={len(unmatched)}\n")
        for summary in result.chains:
            rates = " ".join(f"{k}={v:.4f}" for k, v in sorted(summary.accept_rates.items()))
            fh.write(
                f"chain {summary.chain_index}: best_lp={summary.best_log_posterior!r} {rates}\n"
            )
        fh.write(f"map_log_posterior={result.map_log_posterior!r}\n")
        fh.write(f"theta={[float(w) for w in result.map_params.theta]!r}\n")
        fh.write(f"eta={[(c.a, c.b) for c in result.map_params.eta]!r}\n")
    return 0


def cmd_aggregate(args) -> int:
    out = Path(args.out)
    result = load_fit(_fit_path(out))
    candidates, elections, _, _ = _load_linked(args)
    agg_dir = out / "aggregate"
    agg_dir.mkdir(parents=True, exist_ok=True)

    cycles = sorted({el.cycle for el in elections})
    districts = sorted({el.district for el in elections if el.district is not None})
    per_cycle = []
    decade = []
    for district in districts:
        cycle_estimates = []
        for cycle in cycles:
            subset = [el for el in elections if el.cycle == cycle]
            if any(el.district == district and el.precinct_id in result.assignments for el in subset):
                cycle_estimates.append(agg.district_mean(result, subset, district))
        per_cycle.extend(cycle_estimates)
        if cycle_estimates:
            decade.append(agg.decade_mean(cycle_estimates))
    agg.write_district_means_csv(per_cycle, agg_dir / "district_means.csv")
    agg.write_district_means_csv(decade, agg_dir / "decade_means.csv")

    dist = agg.scope_distribution(result, elections)
    agg.write_distribution_json(dist, agg_dir / "state_distribution.json")
    agg.write_density_csv(dist, agg_dir / "density.csv")
    return 0


def cmd_polarize(args) -> int:
    out = Path(args.out)
    result = load_fit(_fit_path(out))
    candidates, elections, _, _ = _load_linked(args)
    voter_dist = agg.scope_distribution(result, elections)
    fitted_ids = {el.precinct_id for el in elections if el.precinct_id in result.assignments}
    seen = {}
    for el in elections:
        if el.precinct_id in fitted_ids:
            for cand_id in (el.cand0_id, el.cand1_id):
                seen[(cand_id, el.cycle, el.office)] = None
    index = {(c.candidate_id, c.cycle, c.office): c for c in candidates}
    scores = [index[key].cfscore for key in sorted(seen)]
    rng = np.random.default_rng([args.seed, _SEED_POLARIZE])
    report = polarization_report(voter_dist, scores, rng)

    pol_dir = out / "polarization"
    pol_dir.mkdir(parents=True, exist_ok=True)
    rows = [
        ("diff_of_means", report.voters.diff_of_means, report.candidates.diff_of_means,
         report.differences.diff_of_means),
        ("std_dev", report.voters.std_dev, report.candidates.std_dev, report.differences.std_dev),
        ("excess_kurtosis", report.voters.excess_kurtosis, report.candidates.excess_kurtosis,
         report.differences.excess_kurtosis),
    ]
    with open(pol_dir / "report.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "voters", "candidates", "difference"])
        for name, voters, cands, diff in rows:
            writer.writerow([name, repr(voters), repr(cands), repr(diff)])
    _write_json(
        {name: {"voters": voters, "candidates": cands, "difference": diff}
         for name, voters, cands, diff in rows},
        pol_dir / "report.json",
    )
    return 0


def _read_survey(path) -> dict:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[int(row["district"])] = (
                int(row["n_dem"]), int(row["n_rep"]), int(row["n_ind_other"])
            )
    return out


def _read_district_values(path) -> dict:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[int(row["district"])] = float(row["value"])
    return out


def cmd_predict(args) -> int:
    out = Path(args.out)
    result = load_fit(_fit_path(out))
    candidates, elections, _, _ = _load_linked(args)
    target_candidates = load_candidates(args.target_candidates) if args.target_candidates else candidates
    target_elections, _ = load_elections(args.target_elections, target_candidates)
    if args.centers and args.districts:
        centers = load_centers(args.centers)
        boundaries = load_boundaries(args.districts)
        target_elections, _ = link_districts(target_elections, centers, boundaries)
    task = pred.PredictionTask(args.task)
    survey = _read_survey(args.survey) if args.survey else None
    mrp = _read_district_values(args.mrp) if args.mrp else None
    reports = pred.run_prediction_task(
        result, elections, target_elections, target_candidates, task,
        survey=survey, mrp=mrp,
    )
    pred_dir = out / "predictions"
    pred_dir.mkdir(parents=True, exist_ok=True)
    with open(pred_dir / "report.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task", "method", "district", "predicted", "actual"])
        for report in reports:
            for district, predicted, actual in report.rows:
                writer.writerow([report.task.value, report.method, district,
                                 repr(predicted), repr(actual)])
    with open(pred_dir / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task", "method", "mse", "sem"])
        for report in reports:
            writer.writerow([report.task.value, report.method, repr(report.mse), repr(report.sem)])
    return 0


def _default_planted(k: int, family: ComponentFamily) -> MixtureParams:
    means = np.linspace(-2.0, 2.0, k) if k > 1 else np.zeros(1)
    eta = []
    for m in means:
        if family is ComponentFamily.UNIFORM:
            eta.append(ComponentParams(family, float(m) - 0.5, 1.0))
        else:
            eta.append(ComponentParams(family, float(m), 0.5))
    return MixtureParams(np.full(k, 1.0 / k), tuple(eta))


def cmd_simulate(args) -> int:
    out = Path(args.out)
    params = _default_planted(args.k, args.family)
    bimodal = None
    if args.bimodal:
        bimodal = BimodalPrecinct(
            left=ComponentParams(ComponentFamily.NORMAL, -2.0, 0.5),
            right=ComponentParams(ComponentFamily.NORMAL, 2.0, 0.5),
        )
    spec = SyntheticSpec(
        m=args.m,
        n=args.n,
        params=params,
        bimodal=bimodal,
        districts=args.n_districts,
        seed=args.seed + _SEED_SIMULATE,
    )
    dataset = generate(spec)
    write_dataset(dataset, out / "synthetic")
    return 0


def cmd_validate(args) -> int:
    out = Path(args.out)
    means_path = out / "aggregate" / "decade_means.csv"
    if not means_path.exists():
        raise MissingArtifactError(f"missing aggregate artifact at {means_path}; run 'aggregate' first")
    if bool(args.survey) == bool(args.mrp):
        raise PrefInferError("validate needs exactly one of --survey or --mrp")
    reference = _read_district_values(args.survey or args.mrp)
    means = {}
    with open(means_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            means[int(row["district"])] = float(row["mean"])
    common = sorted(set(means) & set(reference))
    transformed = [agg.signed_log_transform(means[d]) for d in common]
    observed = [reference[d] for d in common]
    r, p = agg.pearson_correlation(transformed, observed)
    val_dir = out / "validation"
    val_dir.mkdir(parents=True, exist_ok=True)
    _write_json({"r": r, "p": p, "n": len(common)}, val_dir / "correlation.json")
    with open(val_dir / "scatter.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["district", "transformed_mean", "reference"])
        for d, x, y in zip(common, transformed, observed):
            writer.writerow([d, repr(x), repr(y)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prefinfer",
        description="Infer voter preference distributions from precinct vote shares.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, elections=True):
        p.add_argument("--out", required=True, help="output directory shared by all stages")
        if elections:
            p.add_argument("--elections", required=True, help="election results CSV")
            p.add_argument("--candidates", required=True, help="candidate scores CSV")
            p.add_argument("--centers", help="precinct centers CSV")
            p.add_argument("--districts", help="district boundaries GeoJSON")

    def add_sampler(p):
        p.add_argument("--k", type=_positive_int, default=4, help="number of clusters")
        p.add_argument("--family", type=_family, default=ComponentFamily.NORMAL,
                       help="component family: normal, laplace, or uniform")
        p.add_argument("--chains", type=_positive_int, default=4)
        p.add_argument("--iters", type=_positive_int, default=50_000)
        p.add_argument("--step-size", type=_positive_float, default=0.1)

    p_fit = sub.add_parser("fit", help="fit the mixture to an election dataset")
    add_io(p_fit)
    add_sampler(p_fit)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.set_defaults(func=cmd_fit)

    p_agg = sub.add_parser("aggregate", help="district and state aggregates of a fit")
    add_io(p_agg)
    p_agg.set_defaults(func=cmd_aggregate)

    p_pol = sub.add_parser("polarize", help="polarization metrics of voters vs candidates")
    add_io(p_pol)
    p_pol.add_argument("--seed", type=int, default=0)
    p_pol.set_defaults(func=cmd_polarize)

    p_pred = sub.add_parser("predict", help="predict a target election from a fit")
    add_io(p_pred)
    p_pred.add_argument("--target-elections", required=True, help="target election results CSV")
    p_pred.add_argument("--target-candidates", help="target candidates CSV (defaults to --candidates)")
    p_pred.add_argument("--task", choices=[t.value for t in pred.PredictionTask],
                        default=pred.PredictionTask.NEXT_CYCLE.value)
    p_pred.add_argument("--survey", help="survey affiliation CSV: district,n_dem,n_rep,n_ind_other")
    p_pred.add_argument("--mrp", help="district ideology CSV: district,value")
    p_pred.set_defaults(func=cmd_predict)

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset with ground truth")
    add_io(p_sim, elections=False)
    p_sim.add_argument("--m", type=_positive_int, default=200, help="number of precincts")
    p_sim.add_argument("--n", type=_positive_int, default=1000, help="voters per precinct")
    p_sim.add_argument("--k", type=_positive_int, default=2, help="planted cluster count")
    p_sim.add_argument("--family", type=_family, default=ComponentFamily.NORMAL)
    p_sim.add_argument("--n-districts", type=_positive_int, default=10)
    p_sim.add_argument("--bimodal", action="store_true",
                       help="draw every precinct's voters from a two-mode mixture")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.set_defaults(func=cmd_simulate)

    p_val = sub.add_parser("validate", help="correlate district means with a reference column")
    p_val.add_argument("--out", required=True)
    p_val.add_argument("--survey", help="reference CSV: district,value")
    p_val.add_argument("--mrp", help="reference CSV: district,value")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PrefInferError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())
