"""Exception types shared across the simulator."""


class UnravelsimError(Exception):
    """Base class for all simulator errors."""


class DimensionError(UnravelsimError):
    """Operator or state has an unsupported / mismatched dimension."""


class InvalidOperatorError(UnravelsimError):
    """Operator violates a structural requirement (e.g. not Hermitian)."""


class InvalidStateError(UnravelsimError):
    """State violates normalization, Hermiticity or positivity."""


class LabelError(UnravelsimError):
    """Unknown intervention-record or outcome label."""


class RangeError(UnravelsimError):
    """Evaluation time outside the configured grid range."""


class UndefinedBranchError(UnravelsimError):
    """Requested the state of a zero-probability (undefined) branch."""


class EmptyBranchError(UnravelsimError):
    """Sampled branch carries zero shots; no estimate can be formed."""


class NormalizationError(UnravelsimError):
    """Branch weights deviate from a normalized distribution."""


class ParameterError(UnravelsimError):
    """Configuration parameter outside its valid range."""


class CalibrationError(UnravelsimError):
    """Assignment-matrix calibration received unusable counts."""


class OptimizationError(UnravelsimError):
    """Constrained least-squares unfolding failed to converge."""


class StepSizeError(UnravelsimError):
    """Integrator step produced trace/norm drift beyond tolerance."""


class SampleSizeError(UnravelsimError):
    """Not enough trajectories / samples for the requested statistic."""


class BootstrapError(UnravelsimError):
    """Too many bootstrap resamples failed."""


class SchemaError(UnravelsimError):
    """Input table / label set does not match the expected schema."""
