"""Synthetic election data generated from the model's own voting process.

Each precinct draws a cluster, draws every voter's position from that
cluster's distribution, and counts a vote for candidate 0 exactly when the
voter is strictly closer to candidate 0 (ties go to candidate 1). Datasets
carry planted ground truth so fits can be scored against it.

Precincts are laid out on a row of unit squares, one per district, with
centers strictly inside, so the generated geometry exercises the same
linkage path as real inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .components import ComponentFamily, ComponentParams, sample as component_sample
from .errors import InvalidSpecError, KMismatchError
from .ingest import (
    CandidateRecord,
    DistrictBoundary,
    ElectionRecord,
    Office,
    Party,
    PrecinctCenter,
    write_boundaries,
    write_candidates,
    write_centers,
    write_elections,
)

__all__ = [
    "BimodalPrecinct",
    "SyntheticSpec",
    "SyntheticDataset",
    "VoterDraw",
    "default_candidate_gen",
    "generate",
    "write_dataset",
    "RecoveryScore",
    "recovery_score",
]


@dataclass(frozen=True)
class VoterDraw:
    precinct_id: str
    position: float


@dataclass(frozen=True)
class BimodalPrecinct:
    """Two-component voter mixture applied identically to every precinct."""

    left: ComponentParams
    right: ComponentParams
    weight: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.weight < 1.0:
            raise InvalidSpecError(f"bimodal weight must lie in (0, 1), got {self.weight}")


def default_candidate_gen(rng: np.random.Generator) -> tuple[float, float]:
    """Democrat near -1 and Republican near +1 (variance 0.25), never equal,
    giving varied midpoints so clusters are identifiable from shares alone."""
    while True:
        c0 = rng.normal(-1.0, 0.5)
        c1 = rng.normal(1.0, 0.5)
        if c0 != c1:
            return c0, c1


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic state-cycle dataset.

    ``n`` is either one voter count for every precinct or a per-precinct
    sequence of length ``m``. When ``bimodal`` is set, every precinct's
    voters come from that two-component mixture instead of the planted
    clusters and all planted assignments are 0.
    """

    m: int
    n: object
    params: object  # planted MixtureParams
    candidate_gen: object = default_candidate_gen
    bimodal: BimodalPrecinct | None = None
    districts: int = 1
    seed: int = 0
    state: str = "XX"
    cycle: int = 2008
    office: Office = Office.HOUSE

    def voter_counts(self) -> list[int]:
        if isinstance(self.n, int):
            return [self.n] * self.m
        counts = [int(v) for v in self.n]
        if len(counts) != self.m:
            raise InvalidSpecError(f"{len(counts)} voter counts for {self.m} precincts")
        return counts

    def validate(self) -> None:
        if self.m < 1:
            raise InvalidSpecError(f"need at least one precinct, got {self.m}")
        if self.districts < 1:
            raise InvalidSpecError(f"need at least one district, got {self.districts}")
        if any(c < 1 for c in self.voter_counts()):
            raise InvalidSpecError("every precinct needs at least one voter")


@dataclass(frozen=True)
class SyntheticDataset:
    spec: SyntheticSpec
    elections: tuple
    candidates: tuple
    assignments: dict
    centers: tuple
    boundaries: tuple
    voters: tuple | None = None


def _draw_positions(spec: SyntheticSpec, cluster: int, count: int, rng) -> np.ndarray:
    if spec.bimodal is not None:
        take_left = rng.random(count) < spec.bimodal.weight
        out = np.empty(count)
        n_left = int(take_left.sum())
        if n_left:
            out[take_left] = component_sample(spec.bimodal.left, rng, size=n_left)
        if count - n_left:
            out[~take_left] = component_sample(spec.bimodal.right, rng, size=count - n_left)
        return out
    return np.atleast_1d(component_sample(spec.params.eta[cluster], rng, size=count))


def generate(spec: SyntheticSpec, keep_voters: bool = False) -> SyntheticDataset:
    """Generate a dataset from the planted parameters.

    Each precinct uses its own generator derived from (seed, index), so the
    output is identical regardless of evaluation order or parallel schedule.
    """
    spec.validate()
    counts = spec.voter_counts()
    elections = []
    candidates = []
    assignments = {}
    centers = []
    voters = [] if keep_voters else None
    for i in range(spec.m):
        rng = np.random.default_rng([spec.seed, i])
        precinct_id = f"P{i:05d}"
        district = (i % spec.districts) + 1
        if spec.bimodal is not None:
            cluster = 0
        else:
            cluster = int(rng.choice(spec.params.k, p=spec.params.theta))
        c0, c1 = spec.candidate_gen(rng)
        positions = _draw_positions(spec, cluster, counts[i], rng)
        midpoint = (c0 + c1) / 2.0
        # strictly-closer rule; exact midpoint ties go to candidate 1
        if c0 < c1:
            n0 = int(np.count_nonzero(positions < midpoint))
        else:
            n0 = int(np.count_nonzero(positions > midpoint))
        assignments[precinct_id] = cluster
        candidates.append(
            CandidateRecord(f"{precinct_id}-D", c0, Party.DEMOCRAT, spec.state, district, spec.cycle, spec.office)
        )
        candidates.append(
            CandidateRecord(f"{precinct_id}-R", c1, Party.REPUBLICAN, spec.state, district, spec.cycle, spec.office)
        )
        elections.append(
            ElectionRecord(
                precinct_id=precinct_id,
                state=spec.state,
                cycle=spec.cycle,
                office=spec.office,
                cand0_id=f"{precinct_id}-D",
                cand1_id=f"{precinct_id}-R",
                n0=n0,
                n1=counts[i] - n0,
                district=district,
            )
        )
        centers.append(
            PrecinctCenter(
                precinct_id,
                lon=(district - 1) + rng.uniform(0.05, 0.95),
                lat=rng.uniform(0.05, 0.95),
            )
        )
        if keep_voters:
            voters.extend(VoterDraw(precinct_id, float(v)) for v in positions)
    boundaries = tuple(
        DistrictBoundary(
            district=d,
            state=spec.state,
            rings=(((d - 1.0, 0.0), (float(d), 0.0), (float(d), 1.0), (d - 1.0, 1.0), (d - 1.0, 0.0)),),
        )
        for d in range(1, spec.districts + 1)
    )
    return SyntheticDataset(
        spec=spec,
        elections=tuple(elections),
        candidates=tuple(candidates),
        assignments=assignments,
        centers=tuple(centers),
        boundaries=boundaries,
        voters=tuple(voters) if keep_voters else None,
    )


def write_dataset(dataset: SyntheticDataset, outdir) -> dict:
    """Write the dataset in the canonical input formats plus ground truth.

    Returns a mapping of artifact name to path.
    """
    from pathlib import Path

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "elections": outdir / "elections.csv",
        "candidates": outdir / "candidates.csv",
        "centers": outdir / "centers.csv",
        "boundaries": outdir / "districts.geojson",
        "truth": outdir / "truth.json",
    }
    write_elections(dataset.elections, paths["elections"])
    write_candidates(dataset.candidates, paths["candidates"])
    write_centers(dataset.centers, paths["centers"])
    write_boundaries(dataset.boundaries, paths["boundaries"])
    spec = dataset.spec
    truth = {
        "family": spec.params.family.value,
        "K": spec.params.k,
        "theta": [float(w) for w in spec.params.theta],
        "eta": [{"a": comp.a, "b": comp.b} for comp in spec.params.eta],
        "bimodal": spec.bimodal is not None,
        "seed": spec.seed,
        "assignments": dataset.assignments,
    }
    with open(paths["truth"], "w", encoding="utf-8") as fh:
        json.dump(truth, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return paths


@dataclass(frozen=True)
class RecoveryScore:
    """How well a fit recovered the planted truth, after label matching."""

    param_error: float
    assignment_accuracy: float
    permutation: tuple = field(default=())


def recovery_score(fit, dataset: SyntheticDataset) -> RecoveryScore:
    """Score a fit against the planted parameters and assignments.

    Searches all label permutations for the one minimizing the largest
    absolute component-parameter error, then reports assignment accuracy
    under that permutation. ``permutation[j]`` is the planted cluster matched
    to fitted cluster ``j``.
    """
    planted = dataset.spec.params
    k = planted.k
    if fit.map_params.k != k:
        raise KMismatchError(f"fit has {fit.map_params.k} clusters, planted {k}")
    best_perm = None
    best_err = math.inf
    for perm in permutations(range(k)):
        err = max(
            max(
                abs(fit.map_params.eta[j].a - planted.eta[perm[j]].a),
                abs(fit.map_params.eta[j].b - planted.eta[perm[j]].b),
            )
            for j in range(k)
        )
        if err < best_err:
            best_err = err
            best_perm = perm
    hits = sum(
        1
        for pid, fitted_k in fit.assignments.items()
        if best_perm[fitted_k] == dataset.assignments[pid]
    )
    return RecoveryScore(
        param_error=best_err,
        assignment_accuracy=hits / len(fit.assignments),
        permutation=best_perm,
    )
