"""Metropolis-Hastings sampling of mixture parameters.

The chain walks an unconstrained coordinate vector: the weight simplex is
mapped through an additive log-ratio transform (last cluster as reference),
and positive scales through log. Proposals are block-wise symmetric Gaussian
random walks, one block for the simplex and one per component's (a, b) pair,
cycled in fixed order each sweep. Acceptance compares log posterior plus the
log Jacobian of the unconstrained-to-constrained map, which makes the chain
target the posterior expressed in unconstrained coordinates.

Only the highest-posterior state matters downstream, so chains track a
running maximum instead of retaining a trace.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .components import ComponentFamily, from_unconstrained, to_unconstrained
from .errors import NonFiniteInitError
from .model import MixtureParams, PrecinctData, log_posterior, map_assignments

__all__ = [
    "ChainConfig",
    "ChainState",
    "ChainSummary",
    "FitResult",
    "init_state",
    "mh_step",
    "run_chain",
    "fit",
    "save_fit",
    "load_fit",
]

_INIT_ATTEMPTS = 100


@dataclass(frozen=True)
class ChainConfig:
    """Sampler settings. ``iterations`` counts full sweeps over all blocks."""

    k: int = 4
    family: ComponentFamily = ComponentFamily.NORMAL
    iterations: int = 50_000
    step_size: float = 0.1
    chains: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.chains < 1:
            raise ValueError(f"chains must be >= 1, got {self.chains}")
        if self.step_size <= 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")


def _block_slices(k: int) -> list:
    """Proposal blocks: the simplex coordinates (absent for k=1), then one
    (a, b) pair per component."""
    blocks = [] if k == 1 else [slice(0, k - 1)]
    for j in range(k):
        start = (k - 1) + 2 * j
        blocks.append(slice(start, start + 2))
    return blocks


def _block_names(k: int) -> list:
    names = [] if k == 1 else ["theta"]
    names.extend(f"eta_{j}" for j in range(k))
    return names


def _theta_from_alr(u: np.ndarray) -> np.ndarray:
    w = np.append(u, 0.0)
    w -= w.max()
    e = np.exp(w)
    return e / e.sum()


def _alr_from_theta(theta: np.ndarray) -> np.ndarray:
    return np.log(theta[:-1]) - math.log(theta[-1])


def _decode(config: ChainConfig, vec: np.ndarray):
    """Unconstrained vector -> (params, log Jacobian). Raises ValueError when
    the vector maps outside the representable parameter space."""
    k = config.k
    if k == 1:
        theta = np.ones(1)
        log_jac = 0.0
    else:
        theta = _theta_from_alr(vec[: k - 1])
        with np.errstate(divide="ignore"):
            log_jac = float(np.log(theta).sum())
    eta = []
    for j in range(k):
        start = (k - 1) + 2 * j
        comp, comp_jac = from_unconstrained(config.family, vec[start : start + 2])
        eta.append(comp)
        log_jac += comp_jac
    return MixtureParams(theta, tuple(eta)), log_jac


def _evaluate(config: ChainConfig, vec: np.ndarray, data: PrecinctData):
    """(log posterior, log Jacobian) of an unconstrained vector; (-inf, 0)
    when the vector decodes outside the parameter space."""
    try:
        params, log_jac = _decode(config, vec)
    except (ValueError, OverflowError):
        return float("-inf"), 0.0
    if not math.isfinite(log_jac):
        return float("-inf"), 0.0
    return log_posterior(params, data), log_jac


@dataclass(frozen=True)
class ChainState:
    config: ChainConfig
    vector: np.ndarray
    log_posterior: float
    log_jacobian: float
    accepts: np.ndarray
    proposals: np.ndarray
    iteration: int = 0

    def params(self) -> MixtureParams:
        return _decode(self.config, self.vector)[0]


@dataclass(frozen=True)
class ChainSummary:
    chain_index: int
    seed: tuple
    iterations: int
    best_log_posterior: float
    accept_rates: dict


@dataclass(frozen=True)
class FitResult:
    """Highest-posterior parameters across chains plus MAP precinct clusters."""

    map_params: MixtureParams
    map_log_posterior: float
    assignments: dict
    chains: tuple = field(default_factory=tuple)


def _chain_rng(seed: int, chain_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, chain_index])


def init_state(config: ChainConfig, data: PrecinctData, rng: np.random.Generator) -> ChainState:
    """Draw a starting state from the priors.

    Weights come from the flat Dirichlet, locations from their Normal prior,
    and scales from Inverse-Gamma(1, 1) (Uniform widths from the absolute
    value of their Normal prior). Redraws until the posterior is finite.
    """
    n_blocks = len(_block_slices(config.k))
    for _ in range(_INIT_ATTEMPTS):
        theta = rng.dirichlet(np.ones(config.k))
        if np.any(theta == 0.0):
            continue
        parts = [] if config.k == 1 else [_alr_from_theta(theta)]
        for _ in range(config.k):
            a = rng.normal(0.0, 10.0)
            if config.family is ComponentFamily.UNIFORM:
                b = abs(rng.normal(0.0, 10.0))
                parts.append(np.array([a, b]))
            else:
                b = 1.0 / rng.gamma(1.0, 1.0)
                parts.append(np.array([a, math.log(b)]))
        vec = np.concatenate(parts)
        lp, log_jac = _evaluate(config, vec, data)
        if math.isfinite(lp):
            zeros = np.zeros(n_blocks, dtype=np.int64)
            return ChainState(config, vec, lp, log_jac, zeros, zeros.copy())
    raise NonFiniteInitError(f"no finite-posterior start after {_INIT_ATTEMPTS} attempts")


def mh_step(state: ChainState, data: PrecinctData, block: int, rng: np.random.Generator) -> ChainState:
    """One Metropolis-Hastings update of a single block.

    Proposes a symmetric Gaussian step on the block's unconstrained
    coordinates and accepts with probability
    min(1, exp(delta log posterior + delta log Jacobian)).
    """
    blk = _block_slices(state.config.k)[block]
    vec = state.vector.copy()
    width = blk.stop - blk.start
    vec[blk] += rng.normal(0.0, state.config.step_size, size=width)
    lp, log_jac = _evaluate(state.config, vec, data)
    # 1 - uniform() lies in (0, 1], keeping the log finite
    accept = math.log(1.0 - rng.uniform()) < (lp + log_jac) - (state.log_posterior + state.log_jacobian)
    proposals = state.proposals.copy()
    proposals[block] += 1
    accepts = state.accepts.copy()
    if accept:
        accepts[block] += 1
        return ChainState(state.config, vec, lp, log_jac, accepts, proposals, state.iteration)
    return ChainState(
        state.config, state.vector, state.log_posterior, state.log_jacobian,
        accepts, proposals, state.iteration,
    )


def run_chain(config: ChainConfig, data: PrecinctData, chain_index: int):
    """Run one chain for ``config.iterations`` sweeps.

    Returns the running-maximum-posterior state and a summary. Deterministic
    given (config.seed, chain_index).
    """
    rng = _chain_rng(config.seed, chain_index)
    state = init_state(config, data, rng)
    best = state
    n_blocks = len(_block_slices(config.k))
    for sweep in range(config.iterations):
        for block in range(n_blocks):
            state = mh_step(state, data, block, rng)
            if state.log_posterior > best.log_posterior:
                best = state
        state = ChainState(
            state.config, state.vector, state.log_posterior, state.log_jacobian,
            state.accepts, state.proposals, sweep + 1,
        )
    rates = {
        name: (float(state.accepts[i]) / float(state.proposals[i]) if state.proposals[i] else 0.0)
        for i, name in enumerate(_block_names(config.k))
    }
    summary = ChainSummary(
        chain_index=chain_index,
        seed=(config.seed, chain_index),
        iterations=config.iterations,
        best_log_posterior=best.log_posterior,
        accept_rates=rates,
    )
    return best, summary


def fit(config: ChainConfig, data: PrecinctData, max_workers: int = 1) -> FitResult:
    """Run independent chains, keep the overall highest-posterior state, and
    compute MAP precinct assignments under it.

    Chains may run concurrently; the result depends only on (config, data)
    because the winner is an argmax over a fixed set, with ties resolved
    toward the lowest chain index.
    """
    indices = range(config.chains)
    if max_workers > 1 and config.chains > 1:
        with ThreadPoolExecutor(max_workers=min(max_workers, config.chains)) as pool:
            results = list(pool.map(lambda c: run_chain(config, data, c), indices))
    else:
        results = [run_chain(config, data, c) for c in indices]
    # max() keeps the first maximum, so ties resolve to the lowest chain index
    best_state, _ = max(results, key=lambda pair: pair[0].log_posterior)
    params = best_state.params()
    return FitResult(
        map_params=params,
        map_log_posterior=best_state.log_posterior,
        assignments=map_assignments(params, data),
        chains=tuple(summary for _, summary in results),
    )


def save_fit(result: FitResult, path) -> None:
    """Serialize a fit to JSON."""
    doc = {
        "family": result.map_params.family.value,
        "K": result.map_params.k,
        "theta": [float(w) for w in result.map_params.theta],
        "eta": [{"a": comp.a, "b": comp.b} for comp in result.map_params.eta],
        "log_posterior": result.map_log_posterior,
        "assignments": result.assignments,
        "chains": [
            {
                "seed": list(summary.seed),
                "best_lp": summary.best_log_posterior,
                "accept_rates": summary.accept_rates,
            }
            for summary in result.chains
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_fit(path) -> FitResult:
    """Load a fit previously written by :func:`save_fit`."""
    from .components import ComponentParams

    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    family = ComponentFamily(doc["family"])
    eta = tuple(ComponentParams(family, comp["a"], comp["b"]) for comp in doc["eta"])
    params = MixtureParams(np.array(doc["theta"]), eta)
    chains = tuple(
        ChainSummary(
            chain_index=i,
            seed=tuple(entry["seed"]),
            iterations=0,
            best_log_posterior=entry["best_lp"],
            accept_rates=entry["accept_rates"],
        )
        for i, entry in enumerate(doc.get("chains", []))
    )
    return FitResult(
        map_params=params,
        map_log_posterior=doc["log_posterior"],
        assignments={pid: int(k) for pid, k in doc["assignments"].items()},
        chains=chains,
    )
