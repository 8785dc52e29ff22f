"""Component distribution families for cluster preference distributions.

Three symmetric families are supported: Normal, Laplace, and Uniform. Each is
parameterized by a location-like parameter ``a`` and a scale-like parameter
``b``:

========  =============  ==========================
family    a              b
========  =============  ==========================
Normal    mean           standard deviation
Laplace   location       scale
Uniform   minimum        width (maximum - minimum)
========  =============  ==========================

Priors: ``a`` always gets a Normal(0, variance 100) prior. ``b`` gets an
Inverse-Gamma(shape 1, scale 1) prior for the Normal and Laplace families and
a Normal(0, variance 100) prior truncated to positive width for the Uniform
family. Constant terms of every log density are retained so log posteriors
are comparable across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtr

from .errors import UnsupportedMomentError

__all__ = [
    "ComponentFamily",
    "ComponentParams",
    "cdf",
    "sf",
    "pdf",
    "mean",
    "central_moment",
    "log_prior",
    "sample",
    "to_unconstrained",
    "from_unconstrained",
]

PRIOR_LOC_VARIANCE = 100.0
_LOG_PRIOR_LOC_CONST = -0.5 * math.log(2.0 * math.pi * PRIOR_LOC_VARIANCE)


class ComponentFamily(Enum):
    NORMAL = "normal"
    LAPLACE = "laplace"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class ComponentParams:
    """Parameters of one cluster's preference distribution.

    ``b`` must be positive for the Normal and Laplace families. For the
    Uniform family a nonpositive width is representable so that the
    truncating prior can assign it zero mass (random-walk proposals may step
    below zero); every other operation rejects such widths.
    """

    family: ComponentFamily
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"component parameters must be finite, got ({self.a}, {self.b})")
        if self.b <= 0.0 and self.family is not ComponentFamily.UNIFORM:
            raise ValueError(f"scale must be positive, got {self.b}")


def _check_width(params: ComponentParams) -> None:
    if params.b <= 0.0:
        raise ValueError(f"uniform width must be positive, got {params.b}")


def cdf(params: ComponentParams, x):
    """Cumulative distribution function, closed form per family.

    ``x`` may be a scalar or an ndarray; the result matches its shape.
    """
    a, b = params.a, params.b
    x = np.asarray(x, dtype=float)
    if params.family is ComponentFamily.NORMAL:
        out = ndtr((x - a) / b)
    elif params.family is ComponentFamily.LAPLACE:
        t = (x - a) / b
        e = 0.5 * np.exp(-np.abs(t))
        out = np.where(t < 0.0, e, 1.0 - e)
    else:
        _check_width(params)
        out = np.clip((x - a) / b, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def sf(params: ComponentParams, x):
    """Survival function 1 - cdf, computed without cancellation in the tails."""
    a, b = params.a, params.b
    x = np.asarray(x, dtype=float)
    if params.family is ComponentFamily.NORMAL:
        out = ndtr((a - x) / b)
    elif params.family is ComponentFamily.LAPLACE:
        t = (x - a) / b
        e = 0.5 * np.exp(-np.abs(t))
        out = np.where(t < 0.0, 1.0 - e, e)
    else:
        _check_width(params)
        out = np.clip((a + b - x) / b, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def pdf(params: ComponentParams, x):
    """Probability density function."""
    a, b = params.a, params.b
    x = np.asarray(x, dtype=float)
    if params.family is ComponentFamily.NORMAL:
        z = (x - a) / b
        out = np.exp(-0.5 * z * z) / (b * math.sqrt(2.0 * math.pi))
    elif params.family is ComponentFamily.LAPLACE:
        out = np.exp(-np.abs(x - a) / b) / (2.0 * b)
    else:
        _check_width(params)
        out = np.where((x >= a) & (x <= a + b), 1.0 / b, 0.0)
    return float(out) if out.ndim == 0 else out


def mean(params: ComponentParams) -> float:
    """Distribution mean: ``a`` for Normal and Laplace, ``a + b/2`` for Uniform."""
    if params.family is ComponentFamily.UNIFORM:
        _check_width(params)
        return params.a + params.b / 2.0
    return params.a


_VAR_COEF = {
    ComponentFamily.NORMAL: 1.0,
    ComponentFamily.LAPLACE: 2.0,
    ComponentFamily.UNIFORM: 1.0 / 12.0,
}
_FOURTH_COEF = {
    ComponentFamily.NORMAL: 3.0,
    ComponentFamily.LAPLACE: 24.0,
    ComponentFamily.UNIFORM: 1.0 / 80.0,
}


def central_moment(params: ComponentParams, z: int) -> float:
    """z-th central moment, for z in 0..4.

    All three families are symmetric, so odd moments vanish. The even
    moments are ``c * b**z`` with family coefficients
    (variance: 1, 2, 1/12; fourth: 3, 24, 1/80).
    """
    if z not in (0, 1, 2, 3, 4):
        raise UnsupportedMomentError(f"central moment order {z} not supported (max 4)")
    if params.family is ComponentFamily.UNIFORM:
        _check_width(params)
    if z == 0:
        return 1.0
    if z in (1, 3):
        return 0.0
    coef = _VAR_COEF[params.family] if z == 2 else _FOURTH_COEF[params.family]
    return coef * params.b ** z


def log_prior(params: ComponentParams) -> float:
    """Log prior density of the parameters, constants included.

    Inverse-Gamma(1, 1) on a scale ``b`` contributes ``-2 log b - 1/b``; the
    truncated-Normal width prior of the Uniform family is ``-inf`` at or
    below zero width.
    """
    lp = _LOG_PRIOR_LOC_CONST - params.a ** 2 / (2.0 * PRIOR_LOC_VARIANCE)
    if params.family is ComponentFamily.UNIFORM:
        if params.b <= 0.0:
            return float("-inf")
        return lp + _LOG_PRIOR_LOC_CONST - params.b ** 2 / (2.0 * PRIOR_LOC_VARIANCE)
    return lp - 2.0 * math.log(params.b) - 1.0 / params.b


def sample(params: ComponentParams, rng: np.random.Generator, size=None):
    """Draw from the distribution. Returns a float when ``size`` is None."""
    if params.family is ComponentFamily.NORMAL:
        return rng.normal(params.a, params.b, size)
    if params.family is ComponentFamily.LAPLACE:
        return rng.laplace(params.a, params.b, size)
    _check_width(params)
    return rng.uniform(params.a, params.a + params.b, size)


def to_unconstrained(params: ComponentParams) -> np.ndarray:
    """Map (a, b) to an unconstrained 2-vector.

    ``a`` maps identically. ``b`` maps through log for the Normal and Laplace
    families; the Uniform width maps identically (its positivity is enforced
    by the truncating prior, not the transform).
    """
    if params.family is ComponentFamily.UNIFORM:
        return np.array([params.a, params.b])
    return np.array([params.a, math.log(params.b)])


def from_unconstrained(family: ComponentFamily, vec) -> tuple[ComponentParams, float]:
    """Inverse of :func:`to_unconstrained`.

    Returns the parameters and the log absolute Jacobian determinant of the
    unconstrained-to-constrained map (``log b`` for log-transformed scales,
    0 otherwise).
    """
    a, t = float(vec[0]), float(vec[1])
    if family is ComponentFamily.UNIFORM:
        return ComponentParams(family, a, t), 0.0
    return ComponentParams(family, a, math.exp(t)), t
