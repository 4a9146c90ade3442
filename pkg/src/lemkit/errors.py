"""Exception hierarchy for the toolkit.

Every failure a caller may want to branch on gets its own class.  The CLI
maps these onto exit codes: RefusalError -> 3, ViolationError -> 2, and
everything else derived from LemkitError -> 4 (numeric failure).
"""


class LemkitError(Exception):
    """Base class for all toolkit errors."""


class PolynomialError(LemkitError):
    """Degenerate polynomial input (zero polynomial, bad coefficients)."""


class RootFindingError(LemkitError):
    """Simultaneous iteration failed to converge.

    Carries the last iterates and residuals so the failure is inspectable.
    """

    def __init__(self, message, iterates=None, residuals=None):
        super().__init__(message)
        self.iterates = iterates
        self.residuals = residuals


class RationalMapError(LemkitError):
    """Invalid rational map (zero denominator, common factors, degree 0)."""


class EvaluationError(LemkitError):
    """Evaluation at an indeterminate point (unreduced 0/0)."""


class CurveError(LemkitError):
    """Invalid polyline data (too few points, repeated points, bad flag)."""


class OnCurveError(CurveError):
    """Query point sits on the curve within the guard band."""


class TraceError(LemkitError):
    """Level-set tracing failed (curve leaves every bounding box, meets
    the point at infinity, or cannot be represented as finite polylines)."""


class GridResolutionError(TraceError):
    """Grid too coarse: topology changed under refinement.  Re-run with a
    larger grid."""


class NewtonError(LemkitError):
    """Newton correction onto the level set failed (singular gradient or
    no convergence within the iteration cap)."""


class ViolationError(LemkitError):
    """A checked structural property failed.  Carries a structured report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class GraphError(ViolationError):
    """Input does not assemble into a valid lemniscate graph."""


class MeasureError(LemkitError):
    """Monte Carlo harmonic measure failed (base outside face, walker loss
    above budget, non-injective arc)."""


class WeldingError(LemkitError):
    """Welding sample could not be formed (insufficient walkers, curve not
    Jordan, basepoint not interior)."""


class RefusalError(LemkitError):
    """A hypothesis required by a construction does not hold.

    `condition` is a short machine-readable tag naming the failed
    hypothesis; `details` is free-form human text.
    """

    def __init__(self, condition, details=""):
        super().__init__(f"refused: {condition}" + (f" ({details})" if details else ""))
        self.condition = condition
        self.details = details


class FormatError(LemkitError):
    """Malformed input file (bad JSON schema, unreadable CSV).  The CLI
    treats this as a usage error (exit 1), not a numeric failure."""
