"""District and state aggregation of fitted precinct-level inferences.

Every precinct inherits the preference distribution of its assigned cluster;
district and state summaries weight precincts by their ballot totals, the
only population measure present in the data.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as student_t

from .components import mean as component_mean, pdf, sample as component_sample
from .errors import EmptyDistrictError, EmptyScopeError, LengthMismatchError, ZeroVarianceError

__all__ = [
    "AggregateDistribution",
    "DistrictEstimate",
    "district_mean",
    "decade_mean",
    "scope_distribution",
    "sample_distribution",
    "distribution_pdf",
    "signed_log_transform",
    "pearson_correlation",
    "write_district_means_csv",
    "write_distribution_json",
    "write_density_csv",
]

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class AggregateDistribution:
    """Population-weighted mixture over cluster components for one scope."""

    components: tuple  # of (weight, ComponentParams)
    scope: str
    population: int

    def __post_init__(self):
        total = sum(w for w, _ in self.components)
        if abs(total - 1.0) > WEIGHT_TOL or any(w < 0 for w, _ in self.components):
            raise ValueError(f"weights must form a simplex, got sum {total}")


@dataclass(frozen=True)
class DistrictEstimate:
    district: int
    cycle: object  # a single year or an inclusive (first, last) range
    mean: float
    population: int


def _district_precincts(fit, elections, district):
    return [
        el for el in elections
        if el.district == district and el.precinct_id in fit.assignments
    ]


def district_mean(fit, elections, district: int) -> DistrictEstimate:
    """Ballot-weighted mean of the cluster means assigned to a district's
    precincts."""
    precincts = _district_precincts(fit, elections, district)
    if not precincts:
        raise EmptyDistrictError(f"district {district} has no fitted precincts")
    weights = np.array([el.n for el in precincts], dtype=float)
    means = np.array(
        [component_mean(fit.map_params.eta[fit.assignments[el.precinct_id]]) for el in precincts]
    )
    cycles = sorted({el.cycle for el in precincts})
    cycle = cycles[0] if len(cycles) == 1 else (cycles[0], cycles[-1])
    return DistrictEstimate(
        district=district,
        cycle=cycle,
        mean=float(np.average(means, weights=weights)),
        population=int(weights.sum()),
    )


def decade_mean(estimates) -> DistrictEstimate:
    """Population-weighted combination of per-cycle estimates for one district."""
    estimates = list(estimates)
    if not estimates:
        raise EmptyDistrictError("no per-cycle estimates to combine")
    districts = {e.district for e in estimates}
    if len(districts) != 1:
        raise ValueError(f"estimates span multiple districts: {sorted(districts)}")
    weights = np.array([e.population for e in estimates], dtype=float)
    means = np.array([e.mean for e in estimates])
    years = sorted(
        y for e in estimates for y in (e.cycle if isinstance(e.cycle, tuple) else (e.cycle,))
    )
    cycle = years[0] if years[0] == years[-1] else (years[0], years[-1])
    return DistrictEstimate(
        district=districts.pop(),
        cycle=cycle,
        mean=float(np.average(means, weights=weights)),
        population=int(weights.sum()),
    )


def scope_distribution(fit, elections, district: int | None = None) -> AggregateDistribution:
    """Mixture over clusters weighted by ballots cast in the scope.

    ``district=None`` aggregates every fitted precinct (state scope).
    Clusters with no ballots in the scope are dropped and the remaining
    weights renormalized.
    """
    if district is None:
        precincts = [el for el in elections if el.precinct_id in fit.assignments]
        scope = "state"
    else:
        precincts = _district_precincts(fit, elections, district)
        scope = "district"
    if not precincts:
        raise EmptyScopeError(f"no fitted precincts in scope {scope!r}")
    k = fit.map_params.k
    totals = np.zeros(k)
    for el in precincts:
        totals[fit.assignments[el.precinct_id]] += el.n
    population = totals.sum()
    components = tuple(
        (float(totals[j] / population), fit.map_params.eta[j])
        for j in range(k)
        if totals[j] > 0
    )
    return AggregateDistribution(components=components, scope=scope, population=int(population))


def sample_distribution(dist: AggregateDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` values from the aggregate mixture."""
    weights = np.array([w for w, _ in dist.components])
    picks = rng.choice(len(weights), size=n, p=weights)
    out = np.empty(n)
    for j, (_, comp) in enumerate(dist.components):
        mask = picks == j
        count = int(mask.sum())
        if count:
            out[mask] = component_sample(comp, rng, size=count)
    return out


def distribution_pdf(dist: AggregateDistribution, x) -> np.ndarray:
    """Mixture density at ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for w, comp in dist.components:
        out = out + w * pdf(comp, x)
    return out


def signed_log_transform(x):
    """sign(x) * log(|x| + 1): odd, strictly monotone compression."""
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.log1p(np.abs(x))
    return float(out) if out.ndim == 0 else out


def pearson_correlation(xs, ys) -> tuple[float, float]:
    """Pearson correlation with a two-sided p-value from the t distribution
    on n - 2 degrees of freedom."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise LengthMismatchError(f"length mismatch: {xs.shape} vs {ys.shape}")
    n = xs.size
    if n < 3:
        raise LengthMismatchError(f"need at least 3 pairs, got {n}")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVarianceError("both sequences need nonzero variance")
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    r = float(np.clip(r, -1.0, 1.0))
    if 1.0 - r * r <= 0.0:
        return r, 0.0
    stat = r * np.sqrt((n - 2) / (1.0 - r * r))
    p = float(2.0 * student_t.sf(abs(stat), n - 2))
    return r, p


def _cycle_str(cycle) -> str:
    if isinstance(cycle, tuple):
        return f"{cycle[0]}-{cycle[1]}"
    return str(cycle)


def write_district_means_csv(estimates, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["district", "cycle", "mean", "population"])
        for e in estimates:
            writer.writerow([e.district, _cycle_str(e.cycle), repr(e.mean), e.population])


def write_distribution_json(dist: AggregateDistribution, path) -> None:
    doc = {
        "scope": dist.scope,
        "population": dist.population,
        "components": [
            {"weight": w, "family": comp.family.value, "a": comp.a, "b": comp.b}
            for w, comp in dist.components
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_density_csv(dist: AggregateDistribution, path, num: int = 512, span: float = 4.0) -> None:
    """Plot-ready density grid spanning every component's bulk."""
    lo = min(component_mean(c) - span * max(c.b, 1e-6) for _, c in dist.components)
    hi = max(component_mean(c) + span * max(c.b, 1e-6) for _, c in dist.components)
    xs = np.linspace(lo, hi, num)
    ys = distribution_pdf(dist, xs)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "density"])
        for x, y in zip(xs, ys):
            writer.writerow([repr(float(x)), repr(float(y))])
