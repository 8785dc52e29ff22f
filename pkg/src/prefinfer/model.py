"""Marginalized mixture likelihood of precinct vote counts.

Each precinct's two candidates split the policy axis at their midpoint; under
a cluster's preference distribution the probability that a voter falls on the
Democrat's side of that boundary is the component CDF (or survival function,
when the Democrat sits to the right) at the midpoint. Voter positions and
cluster assignments are marginalized analytically, leaving a per-precinct
mixture of binomial-shaped terms:

    sum_i log sum_k exp( log theta_k + n0_i log phi_ik + n1_i log(1 - phi_ik) )

The binomial coefficient is constant in the parameters and omitted from the
fitted objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .components import ComponentFamily, ComponentParams, cdf, log_prior, sf
from .errors import EmptyDatasetError, InvalidSimplexError

__all__ = [
    "MixtureParams",
    "Precinct",
    "PrecinctData",
    "build_precinct_data",
    "phi",
    "log_likelihood",
    "precinct_log_marginals",
    "log_posterior",
    "mc_oracle_likelihood",
    "map_assignment",
    "map_assignments",
]

PHI_EPS = 1e-300
SIMPLEX_TOL = 1e-12


def _check_simplex(theta: np.ndarray) -> None:
    if theta.ndim != 1 or theta.size < 1:
        raise InvalidSimplexError(f"theta must be a nonempty vector, got shape {theta.shape}")
    if np.any(theta < 0.0) or abs(float(theta.sum()) - 1.0) > SIMPLEX_TOL:
        raise InvalidSimplexError(f"theta is not a probability simplex: {theta}")


@dataclass(frozen=True, eq=False)
class MixtureParams:
    """Full mixture state: cluster weights plus one component per cluster."""

    theta: np.ndarray
    eta: tuple

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "eta", tuple(self.eta))
        _check_simplex(theta)
        if len(self.eta) != theta.size:
            raise InvalidSimplexError(
                f"{theta.size} weights but {len(self.eta)} components"
            )
        families = {comp.family for comp in self.eta}
        if len(families) != 1:
            raise ValueError(f"all components must share one family, got {families}")

    @property
    def k(self) -> int:
        return len(self.eta)

    @property
    def family(self):
        return self.eta[0].family


@dataclass(frozen=True)
class Precinct:
    """Per-precinct likelihood inputs: candidate midpoint, orientation, counts.

    ``orient`` is +1 when the Democrat's score is below the Republican's,
    -1 when above, and 0 when the two scores coincide.
    """

    precinct_id: str
    midpoint: float
    orient: int
    n0: int
    n1: int

    @property
    def n(self) -> int:
        return self.n0 + self.n1


def precinct_from_scores(precinct_id: str, c0: float, c1: float, n0: int, n1: int) -> Precinct:
    """Build a precinct term from raw candidate scores."""
    orient = 1 if c0 < c1 else (-1 if c0 > c1 else 0)
    return Precinct(precinct_id, (c0 + c1) / 2.0, orient, n0, n1)


class PrecinctData:
    """Immutable collection of precinct terms with cached arrays."""

    def __init__(self, precincts):
        self.precincts = tuple(precincts)
        n = len(self.precincts)
        self.midpoint = np.array([p.midpoint for p in self.precincts], dtype=float)
        self.orient = np.array([p.orient for p in self.precincts], dtype=np.int8)
        self.n0 = np.array([p.n0 for p in self.precincts], dtype=float)
        self.n1 = np.array([p.n1 for p in self.precincts], dtype=float)
        self._ids = tuple(p.precinct_id for p in self.precincts)
        assert n == len(self._ids)

    @property
    def precinct_ids(self):
        return self._ids

    def __len__(self):
        return len(self.precincts)

    def __iter__(self):
        return iter(self.precincts)


def build_precinct_data(elections, candidates) -> PrecinctData:
    """Resolve candidate scores and precompute per-precinct likelihood inputs."""
    from .ingest import candidate_index

    index = candidate_index(candidates)
    precincts = []
    for el in elections:
        c0 = index[(el.cand0_id, el.cycle, el.office)].cfscore
        c1 = index[(el.cand1_id, el.cycle, el.office)].cfscore
        precincts.append(precinct_from_scores(el.precinct_id, c0, c1, el.n0, el.n1))
    return PrecinctData(precincts)


def phi(precinct: Precinct, component: ComponentParams) -> float:
    """Probability a voter from the component lands on the Democrat's side.

    Equal candidate scores split the electorate evenly. The result is clamped
    away from 0 and 1 so its logarithm stays finite.
    """
    if precinct.orient > 0:
        p = cdf(component, precinct.midpoint)
    elif precinct.orient < 0:
        p = sf(component, precinct.midpoint)
    else:
        p = 0.5
    return min(max(float(p), PHI_EPS), 1.0 - PHI_EPS)


def _log_share_terms(component: ComponentParams, data: PrecinctData):
    """Log phi and log(1 - phi) for every precinct, each clamped at 1e-300."""
    c = cdf(component, data.midpoint)
    s = sf(component, data.midpoint)
    p = np.where(data.orient > 0, c, np.where(data.orient < 0, s, 0.5))
    q = np.where(data.orient > 0, s, np.where(data.orient < 0, c, 0.5))
    return np.log(np.maximum(p, PHI_EPS)), np.log(np.maximum(q, PHI_EPS))


def _marginal_matrix(params: MixtureParams, data: PrecinctData) -> np.ndarray:
    with np.errstate(divide="ignore"):
        logw = np.log(params.theta)
    out = np.empty((len(data), params.k))
    for j, comp in enumerate(params.eta):
        lp, lq = _log_share_terms(comp, data)
        out[:, j] = logw[j] + data.n0 * lp + data.n1 * lq
    return out


def precinct_log_marginals(params: MixtureParams, data: PrecinctData) -> np.ndarray:
    """Per-precinct log marginal likelihood (cluster assignment summed out)."""
    if len(data) == 0:
        raise EmptyDatasetError("no precincts to evaluate")
    terms = _marginal_matrix(params, data)
    peak = terms.max(axis=1)
    return peak + np.log(np.exp(terms - peak[:, None]).sum(axis=1))


def log_likelihood(params: MixtureParams, data: PrecinctData) -> float:
    """Marginalized log likelihood of all precincts."""
    return float(precinct_log_marginals(params, data).sum())


def log_posterior(params: MixtureParams, data: PrecinctData) -> float:
    """Log posterior: likelihood plus component priors plus the flat
    Dirichlet's constant log density log((K-1)!)."""
    _check_simplex(params.theta)
    lp = math.lgamma(params.k)
    for comp in params.eta:
        lp += log_prior(comp)
    if not math.isfinite(lp):
        return float("-inf")
    return lp + log_likelihood(params, data)


def mc_oracle_likelihood(
    params: MixtureParams,
    c0: float,
    c1: float,
    n0: int,
    n1: int,
    samples: int,
    rng: np.random.Generator,
) -> float:
    """Brute-force probability of observing exactly (n0, n1) in one precinct.

    Simulates the full generative process: draw a cluster, draw every voter's
    position from it, and give each voter to the strictly closer candidate
    (ties to candidate 1). Intended as a test oracle for the marginalized
    likelihood; the closed form times C(n, n0) should match this estimate.
    """
    if samples < 10_000:
        raise ValueError(f"need at least 10000 replicates, got {samples}")
    n = n0 + n1
    ks = rng.choice(params.k, size=samples, p=params.theta)
    a = np.array([comp.a for comp in params.eta])[ks][:, None]
    b = np.array([comp.b for comp in params.eta])[ks][:, None]
    family = params.family
    if family is ComponentFamily.NORMAL:
        v = rng.normal(a, b, size=(samples, n))
    elif family is ComponentFamily.LAPLACE:
        v = rng.laplace(a, b, size=(samples, n))
    else:
        v = rng.uniform(a, a + b, size=(samples, n))
    votes0 = (np.abs(v - c0) < np.abs(v - c1)).sum(axis=1)
    return float(np.mean(votes0 == n0))


def map_assignments(params: MixtureParams, data: PrecinctData) -> dict:
    """Highest-posterior cluster for each precinct, ties to the lowest index."""
    terms = _marginal_matrix(params, data)
    best = np.argmax(terms, axis=1)
    return {pid: int(k) for pid, k in zip(data.precinct_ids, best)}


def map_assignment(params: MixtureParams, precinct: Precinct) -> int:
    """Highest-posterior cluster for a single precinct."""
    return map_assignments(params, PrecinctData([precinct]))[precinct.precinct_id]
