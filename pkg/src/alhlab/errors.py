"""Exception hierarchy shared by every module of the package."""


class AlhError(Exception):
    """Base class for all package errors."""


class ConfigurationError(AlhError, ValueError):
    """Invalid parameters, missing inputs or unknown scenario."""


class BoundaryStencilError(AlhError, IndexError):
    """A finite-difference stencil would leave the sampled grid."""


class DegenerateMetricError(AlhError, ArithmeticError):
    """Metric is not (numerically) positive definite."""


class DimensionError(AlhError, ValueError):
    """Operation undefined in the requested dimension."""


class NumericAbort(AlhError, ArithmeticError):
    """Base for failures of a numerical procedure (exit code 4)."""


class PositivityViolation(NumericAbort):
    """A quantity certified positive dropped to or below its floor."""


class StiffnessError(NumericAbort):
    """The adaptive integrator could not make progress."""


class BlowupError(NumericAbort):
    """State norm exceeded the blow-up sentinel."""


class FlowDegeneracyError(NumericAbort):
    """The tangential metric lost positive definiteness along the flow."""


class InstabilityError(NumericAbort):
    """A derivative system left its admissible growth envelope."""


class DegenerateDataError(NumericAbort):
    """Regression data cannot determine the requested fit."""


class DomainError(AlhError, ValueError):
    """Input samples outside the domain of an operation."""


class ResolutionError(AlhError, ValueError):
    """Sampling too coarse for the requested estimate."""


class FitWindowError(AlhError, ValueError):
    """Fit window holds too few samples."""


class PreconditionError(AlhError, ValueError):
    """Caller violated a documented precondition."""


class UnsupportedCaseError(AlhError, ValueError):
    """Parameters fall outside the cases an operation covers."""


class NotEinsteinError(AlhError, ValueError):
    """Metric failed the Einstein certification."""

    def __init__(self, defect, tolerance):
        super().__init__(
            f"metric is not Einstein: |Ric + n g| = {defect:.3e} > {tolerance:.3e}"
        )
        self.defect = defect
        self.tolerance = tolerance


class DecayCertificationError(AlhError, ValueError):
    """Curvature decay hypothesis could not be certified on the family."""


class ClassificationMismatch(AlhError, ValueError):
    """Measured rates match no row of the regularity table."""


class HypothesisWarning(UserWarning):
    """Flow left the regime where the comparison bands are certified."""
