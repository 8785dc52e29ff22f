"""Vote-share prediction from a fitted comparison election, plus baselines.

A fitted model predicts a target election by assuming voter preferences carry
over unchanged: each precinct's predicted Democratic share is the assigned
cluster's CDF mass on the Democrat's side of the target candidates' midpoint.
Baselines: carry the comparison election's observed share forward, convert
survey party affiliation into a share, or leave-one-out linear regression of
shares on external district ideology scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DegenerateFoldError,
    EmptyDistrictError,
    EmptySurveyError,
    LengthMismatchError,
    UnassignedPrecinctError,
)
from .model import phi, precinct_from_scores

__all__ = [
    "PredictionTask",
    "PredictionReport",
    "predict_precinct_share",
    "predict_district_share",
    "baseline_previous_share",
    "baseline_survey_proxy",
    "baseline_mrp_crossval",
    "evaluate",
    "actual_district_share",
    "run_prediction_task",
]


class PredictionTask(Enum):
    NEXT_CYCLE = "next-cycle"
    SAME_YEAR = "same-year"


@dataclass(frozen=True)
class PredictionReport:
    """Per-district predictions of one method on one task."""

    task: PredictionTask
    method: str
    rows: tuple  # of (district, predicted, actual)
    mse: float
    sem: float


def predict_precinct_share(fit, precinct_id: str, target_c0: float, target_c1: float) -> float:
    """Predicted Democratic share of one precinct against target candidates."""
    if precinct_id not in fit.assignments:
        raise UnassignedPrecinctError(f"precinct {precinct_id!r} has no cluster assignment")
    component = fit.map_params.eta[fit.assignments[precinct_id]]
    target = precinct_from_scores(precinct_id, target_c0, target_c1, 0, 0)
    return phi(target, component)


def predict_district_share(fit, elections, district: int, targets) -> float:
    """Ballot-weighted mean of precinct predictions within a district.

    ``targets`` is either a single (c0, c1) pair applied to every precinct or
    a mapping from precinct id to its own pair.
    """
    precincts = [el for el in elections if el.district == district]
    if isinstance(targets, dict):
        precincts = [el for el in precincts if el.precinct_id in targets]
    if not precincts:
        raise EmptyDistrictError(f"district {district} has no precincts to predict")
    num = 0.0
    den = 0.0
    for el in precincts:
        c0, c1 = targets[el.precinct_id] if isinstance(targets, dict) else targets
        share = predict_precinct_share(fit, el.precinct_id, c0, c1)
        num += el.n * share
        den += el.n
    return num / den


def baseline_previous_share(comparison_share: float) -> float:
    """Same-party carryover: the target share equals the comparison share."""
    return comparison_share


def baseline_survey_proxy(n_dem: int, n_rep: int, n_ind_other: int) -> float:
    """Democratic share proxy from reported party affiliation, splitting
    Independent/Other evenly."""
    total = n_dem + n_rep + n_ind_other
    if total < 1:
        raise EmptySurveyError("no survey responses")
    return (n_dem + 0.5 * n_ind_other) / total


def baseline_mrp_crossval(mrp_scores: dict, actual_shares: dict) -> dict:
    """Leave-one-out linear prediction of shares from district ideology scores.

    For each district, ordinary least squares is fit on all other districts
    and used to predict the held-out one; predictions are clamped to [0, 1].
    """
    if set(mrp_scores) != set(actual_shares):
        raise LengthMismatchError("score and share district sets differ")
    districts = sorted(mrp_scores)
    if len(districts) < 3:
        raise LengthMismatchError(f"need at least 3 districts, got {len(districts)}")
    scores = np.array([mrp_scores[d] for d in districts], dtype=float)
    shares = np.array([actual_shares[d] for d in districts], dtype=float)
    out = {}
    for i, district in enumerate(districts):
        mask = np.arange(len(districts)) != i
        xs, ys = scores[mask], shares[mask]
        dx = xs - xs.mean()
        sxx = float(dx @ dx)
        if sxx == 0.0:
            raise DegenerateFoldError(f"zero score variance leaving out district {district}")
        slope = float(dx @ (ys - ys.mean())) / sxx
        intercept = float(ys.mean() - slope * xs.mean())
        out[district] = float(np.clip(intercept + slope * scores[i], 0.0, 1.0))
    return out


def evaluate(predictions: dict, actuals: dict) -> tuple[float, float]:
    """Mean squared error and the standard error of its mean.

    The SEM is the sample standard deviation (n - 1 denominator) of the
    squared errors divided by sqrt(n).
    """
    if set(predictions) != set(actuals):
        raise LengthMismatchError("prediction and actual district sets differ")
    keys = sorted(predictions)
    if len(keys) < 2:
        raise LengthMismatchError(f"need at least 2 districts, got {len(keys)}")
    sq = np.array([(predictions[d] - actuals[d]) ** 2 for d in keys])
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(len(keys)))


def actual_district_share(elections, district: int) -> float:
    """Observed Democratic share over all ballots of a district."""
    precincts = [el for el in elections if el.district == district]
    if not precincts:
        raise EmptyDistrictError(f"district {district} has no precincts")
    votes0 = sum(el.n0 for el in precincts)
    total = sum(el.n for el in precincts)
    return votes0 / total


def run_prediction_task(
    fit,
    comparison_elections,
    target_elections,
    target_candidates,
    task: PredictionTask,
    survey: dict | None = None,
    mrp: dict | None = None,
) -> list[PredictionReport]:
    """Evaluate the model and every available baseline on one prediction task.

    Districts are the intersection of linked districts present in both
    elections; the model weights precincts by comparison-election ballots and
    reads target candidate scores per precinct from the target election.
    ``survey`` maps district -> (n_dem, n_rep, n_ind_other); ``mrp`` maps
    district -> ideology score.
    """
    from .ingest import candidate_index

    index = candidate_index(target_candidates)
    target_pairs = {}
    for el in target_elections:
        c0 = index[(el.cand0_id, el.cycle, el.office)].cfscore
        c1 = index[(el.cand1_id, el.cycle, el.office)].cfscore
        target_pairs[el.precinct_id] = (c0, c1)
    comparison_districts = {el.district for el in comparison_elections if el.district is not None}
    target_districts = {el.district for el in target_elections if el.district is not None}
    districts = sorted(comparison_districts & target_districts)
    if len(districts) < 2:
        raise EmptyDistrictError(f"need at least 2 common districts, got {len(districts)}")

    actuals = {d: actual_district_share(target_elections, d) for d in districts}
    model_preds = {
        d: predict_district_share(fit, comparison_elections, d, target_pairs) for d in districts
    }
    previous_preds = {
        d: baseline_previous_share(actual_district_share(comparison_elections, d))
        for d in districts
    }

    reports = []
    for method, preds in (("model", model_preds), ("previous_share", previous_preds)):
        mse, sem = evaluate(preds, actuals)
        rows = tuple((d, preds[d], actuals[d]) for d in districts)
        reports.append(PredictionReport(task=task, method=method, rows=rows, mse=mse, sem=sem))
    if survey is not None:
        preds = {d: baseline_survey_proxy(*survey[d]) for d in districts}
        mse, sem = evaluate(preds, actuals)
        rows = tuple((d, preds[d], actuals[d]) for d in districts)
        reports.append(
            PredictionReport(task=task, method="survey_proxy", rows=rows, mse=mse, sem=sem)
        )
    if mrp is not None:
        preds = baseline_mrp_crossval({d: mrp[d] for d in districts}, actuals)
        mse, sem = evaluate(preds, actuals)
        rows = tuple((d, preds[d], actuals[d]) for d in districts)
        reports.append(
            PredictionReport(task=task, method="mrp_crossval", rows=rows, mse=mse, sem=sem)
        )
    return reports
