"""Exception types raised across the package."""


class PrefInferError(Exception):
    """Base class for all errors raised by this package."""


# --- data ingestion ---------------------------------------------------------

class MissingColumnError(PrefInferError):
    """An input file lacks a required column or property."""


class NonFiniteScoreError(PrefInferError):
    """A candidate ideology score is NaN, infinite, or unparseable."""


class DuplicateKeyError(PrefInferError):
    """Two records share a key that must be unique."""


class UnknownCandidateError(PrefInferError):
    """An election row references a candidate that was never loaded."""


class NegativeCountError(PrefInferError):
    """A vote count is negative."""


class PartyConflictError(PrefInferError):
    """An election's two candidates are not one Democrat and one Republican."""


class DegenerateRingError(PrefInferError):
    """A boundary ring has fewer than four vertices or is not closed."""


class MissingCenterError(PrefInferError):
    """A precinct has no geographic center entry."""


# --- model evaluation -------------------------------------------------------

class EmptyDatasetError(PrefInferError):
    """A likelihood was requested for zero precincts."""


class InvalidSimplexError(PrefInferError):
    """Cluster weights are negative or do not sum to one."""


class UnsupportedMomentError(PrefInferError):
    """A central moment of unsupported order was requested."""


# --- sampling ---------------------------------------------------------------

class NonFiniteInitError(PrefInferError):
    """Chain initialization failed to find a finite posterior."""


# --- aggregation and reporting ----------------------------------------------

class EmptyDistrictError(PrefInferError):
    """A district-level quantity was requested for a district with no precincts."""


class EmptyScopeError(PrefInferError):
    """An aggregate distribution was requested over an empty scope."""


class ZeroVarianceError(PrefInferError):
    """An operation requires nonzero variance."""


class LengthMismatchError(PrefInferError):
    """Paired sequences have different lengths or key sets."""


class NegativeRadicandError(PrefInferError):
    """A mixture variance came out negative beyond numerical tolerance."""


class TooFewPointsError(PrefInferError):
    """A sample is too small for the requested fit."""


# --- prediction -------------------------------------------------------------

class UnassignedPrecinctError(PrefInferError):
    """A prediction was requested for a precinct without a cluster assignment."""


class EmptySurveyError(PrefInferError):
    """A survey baseline was requested with zero responses."""


class DegenerateFoldError(PrefInferError):
    """A leave-one-out fold has zero variance in the regressor."""


# --- synthetic data ---------------------------------------------------------

class InvalidSpecError(PrefInferError):
    """A synthetic dataset specification is inconsistent."""


class KMismatchError(PrefInferError):
    """A recovery score was requested across differing cluster counts."""


# --- pipeline ---------------------------------------------------------------

class MissingArtifactError(PrefInferError):
    """A pipeline stage requires an artifact that has not been produced."""
