"""Polarization metrics for voter mixtures and candidate score samples.

Three metrics are computed for each population:

* difference of means: fit an equal-weight, shared-variance two-Normal
  mixture and report |mu2 - mu1| / sigma, a proxy for probability mass
  missing from the center;
* dispersion: the standard deviation of the distribution;
* bimodality: excess kurtosis (fourth central moment over squared variance,
  minus 3), where negative values indicate two separated modes.

Voter metrics are evaluated analytically on the aggregate mixture, except the
difference of means, which operates on seeded draws. Candidate metrics are
sample moments of the raw score list (population denominators).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .aggregate import AggregateDistribution, sample_distribution
from .components import central_moment, mean as component_mean
from .errors import (
    NegativeRadicandError,
    TooFewPointsError,
    UnsupportedMomentError,
    ZeroVarianceError,
)

__all__ = [
    "MetricTriple",
    "PolarizationReport",
    "TwoNormalFit",
    "mixture_mean",
    "mixture_sd",
    "mixture_central_moment",
    "mixture_excess_kurtosis",
    "fit_two_normal",
    "difference_of_means",
    "polarization_report",
]

SIGMA_FLOOR = 1e-6
RADICAND_TOL = 1e-12


@dataclass(frozen=True)
class TwoNormalFit:
    """Equal-weight two-Normal fit with a single shared sigma, mu1 <= mu2."""

    mu1: float
    mu2: float
    sigma: float


@dataclass(frozen=True)
class MetricTriple:
    diff_of_means: float
    std_dev: float
    excess_kurtosis: float


@dataclass(frozen=True)
class PolarizationReport:
    voters: MetricTriple
    candidates: MetricTriple
    differences: MetricTriple


def mixture_mean(dist: AggregateDistribution) -> float:
    """Weighted mean of the mixture."""
    return float(sum(w * component_mean(comp) for w, comp in dist.components))


def mixture_sd(dist: AggregateDistribution) -> float:
    """Mixture standard deviation sqrt(sum_k w_k (m_k^2 + var_k) - M^2)."""
    m = mixture_mean(dist)
    second = sum(
        w * (component_mean(comp) ** 2 + central_moment(comp, 2))
        for w, comp in dist.components
    )
    radicand = second - m * m
    if radicand < 0.0:
        if radicand < -RADICAND_TOL:
            raise NegativeRadicandError(f"mixture variance came out {radicand}")
        radicand = 0.0
    return math.sqrt(radicand)


def mixture_central_moment(dist: AggregateDistribution, z: int) -> float:
    """z-th central moment of the mixture for z in {2, 3, 4}.

    Expands E[(X - M)^z] per component with the binomial theorem around each
    component mean:  sum_k w_k sum_{j=0}^{z} C(z, j) m_j(k) (mean_k - M)^(z-j)
    where m_j(k) is the component's j-th central moment.
    """
    if z not in (2, 3, 4):
        raise UnsupportedMomentError(f"mixture central moment order {z} not supported")
    m = mixture_mean(dist)
    total = 0.0
    for w, comp in dist.components:
        delta = component_mean(comp) - m
        total += w * sum(
            math.comb(z, j) * central_moment(comp, j) * delta ** (z - j)
            for j in range(z + 1)
        )
    return total


def mixture_excess_kurtosis(dist: AggregateDistribution) -> float:
    """Fourth central moment over squared variance, minus the Gaussian 3."""
    sd = mixture_sd(dist)
    if sd == 0.0:
        raise ZeroVarianceError("kurtosis undefined for a zero-variance mixture")
    return mixture_central_moment(dist, 4) / sd ** 4 - 3.0


def fit_two_normal(sample, tol: float = 1e-8, max_iter: int = 1000) -> TwoNormalFit:
    """EM fit of an equal-weight two-Normal mixture with one shared sigma.

    Initialized at mu = mean -+ SD and sigma = SD; converges when the largest
    parameter change drops below ``tol``. Sigma is floored at 1e-6 so the
    standardized metric stays finite on perfectly separable samples.
    """
    x = np.asarray(sample, dtype=float)
    if x.size < 4:
        raise TooFewPointsError(f"need at least 4 points, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    center = float(x.mean())
    spread = float(x.std())
    mu1, mu2 = center - spread, center + spread
    sigma = max(spread, SIGMA_FLOOR)
    for _ in range(max_iter):
        # responsibilities of component 1; equal weights cancel
        gap = ((x - mu2) ** 2 - (x - mu1) ** 2) / (2.0 * sigma * sigma)
        r = expit(gap)
        w1 = r.sum()
        w2 = x.size - w1
        new_mu1 = float((r * x).sum() / w1) if w1 > 0 else mu1
        new_mu2 = float(((1.0 - r) * x).sum() / w2) if w2 > 0 else mu2
        pooled = (r * (x - new_mu1) ** 2 + (1.0 - r) * (x - new_mu2) ** 2).sum() / x.size
        new_sigma = max(math.sqrt(pooled), SIGMA_FLOOR)
        change = max(abs(new_mu1 - mu1), abs(new_mu2 - mu2), abs(new_sigma - sigma))
        mu1, mu2, sigma = new_mu1, new_mu2, new_sigma
        if change < tol:
            break
    if mu1 > mu2:
        mu1, mu2 = mu2, mu1
    return TwoNormalFit(mu1=mu1, mu2=mu2, sigma=sigma)


def difference_of_means(sample, tol: float = 1e-8, max_iter: int = 1000) -> float:
    """Standardized gap |mu2 - mu1| / sigma of the two-Normal fit."""
    fitted = fit_two_normal(sample, tol=tol, max_iter=max_iter)
    return (fitted.mu2 - fitted.mu1) / fitted.sigma


def _sample_triple(scores) -> MetricTriple:
    x = np.asarray(scores, dtype=float)
    m2 = float(np.mean((x - x.mean()) ** 2))
    m4 = float(np.mean((x - x.mean()) ** 4))
    if m2 == 0.0:
        raise ZeroVarianceError("candidate scores have zero variance")
    return MetricTriple(
        diff_of_means=difference_of_means(x),
        std_dev=math.sqrt(m2),
        excess_kurtosis=m4 / m2 ** 2 - 3.0,
    )


def polarization_report(
    voter_dist: AggregateDistribution,
    candidate_scores,
    rng: np.random.Generator,
    n_draws: int = 100_000,
) -> PolarizationReport:
    """Metric triples for voters and candidates, plus voter-minus-candidate
    differences.

    Voter dispersion and kurtosis come from the mixture's analytic moments;
    the voter difference of means uses ``n_draws`` seeded draws from the
    mixture. Candidates contribute their raw score list.
    """
    scores = np.asarray(candidate_scores, dtype=float)
    if scores.size < 4:
        raise TooFewPointsError(f"need at least 4 candidate scores, got {scores.size}")
    draws = sample_distribution(voter_dist, n_draws, rng)
    voters = MetricTriple(
        diff_of_means=difference_of_means(draws),
        std_dev=mixture_sd(voter_dist),
        excess_kurtosis=mixture_excess_kurtosis(voter_dist),
    )
    candidates = _sample_triple(scores)
    differences = MetricTriple(
        diff_of_means=voters.diff_of_means - candidates.diff_of_means,
        std_dev=voters.std_dev - candidates.std_dev,
        excess_kurtosis=voters.excess_kurtosis - candidates.excess_kurtosis,
    )
    return PolarizationReport(voters=voters, candidates=candidates, differences=differences)
