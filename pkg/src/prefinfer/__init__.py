"""Infer voter preference distributions from precinct-level vote shares.

A mixture of spatial voting models pools precincts into clusters sharing one
preference distribution; Metropolis-Hastings MCMC fits the cluster weights
and component parameters to two-candidate vote counts and candidate ideology
scores. Fits aggregate to district and state preference distributions,
polarization metrics, and vote-share predictions.
"""

from .components import ComponentFamily, ComponentParams
from .errors import PrefInferError
from .ingest import (
    CandidateRecord,
    DistrictBoundary,
    ElectionRecord,
    Office,
    Party,
    PrecinctCenter,
)
from .model import MixtureParams, Precinct, PrecinctData, build_precinct_data
from .sampler import ChainConfig, FitResult, fit, load_fit, save_fit
from .aggregate import AggregateDistribution, DistrictEstimate
from .polarization import PolarizationReport, polarization_report
from .predict import PredictionReport, PredictionTask
from .synthetic import SyntheticDataset, SyntheticSpec, generate, recovery_score

__all__ = [
    "AggregateDistribution",
    "CandidateRecord",
    "ChainConfig",
    "ComponentFamily",
    "ComponentParams",
    "DistrictBoundary",
    "DistrictEstimate",
    "ElectionRecord",
    "FitResult",
    "MixtureParams",
    "Office",
    "Party",
    "PolarizationReport",
    "Precinct",
    "PrecinctCenter",
    "PrecinctData",
    "PredictionReport",
    "PredictionTask",
    "PrefInferError",
    "SyntheticDataset",
    "SyntheticSpec",
    "build_precinct_data",
    "fit",
    "generate",
    "load_fit",
    "polarization_report",
    "recovery_score",
    "save_fit",
]

__version__ = "0.1.0"
