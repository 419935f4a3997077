from typing import Any, Dict, Optional


class KStabError(Exception):
    """Base class for every error raised by the library."""

    code = "kstab_error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Structured form used by the CLI error report."""
        return {
            "error": self.code,
            "message": self.message,
            "details": {k: str(v) for k, v in sorted(self.details.items())},
        }


class PolygonValidationError(KStabError):
    code = "invalid_polygon"


class OrientationError(PolygonValidationError):
    code = "clockwise_polygon"


class DomainError(KStabError):
    code = "domain_error"


class UnsupportedDegreeError(KStabError):
    code = "unsupported_degree"


class ArityError(KStabError):
    code = "insufficient_data"


class ResolutionError(KStabError):
    code = "resolution_error"


class PreconditionError(KStabError):
    code = "precondition_failed"


class StabilityPreconditionError(PreconditionError):
    code = "not_semistable"


class StablePolarizationError(PreconditionError):
    code = "stable_polarization"


class PositivityError(KStabError):
    code = "not_positive"


class DegenerateTorusError(KStabError):
    code = "degenerate_torus"


class SamplingError(KStabError):
    code = "sampling_error"


class NonConvergenceError(KStabError):
    code = "non_convergence"


class ToleranceError(KStabError):
    code = "tolerance_exceeded"


class InternalConsistencyError(KStabError):
    code = "internal_consistency"
