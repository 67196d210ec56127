"""Exception types shared across the planner."""


class PlannerError(Exception):
    """Base class for all planner errors."""


class InvalidInput(PlannerError):
    """Caller-supplied data violates a precondition."""


class ValidationError(InvalidInput):
    """Problem-spec validation failure with a machine-readable error list.

    Each entry is a dict with ``field``, ``message``, and optionally
    ``feature_index`` for GeoJSON features.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(e["message"] for e in self.errors))


class DegenerateGeometry(PlannerError):
    """Geometry with no usable area (collinear vertices, zero-area region)."""


class InfeasibleError(PlannerError):
    """No battery-feasible routing exists for the given fleet.

    Carries the offending viewpoint index (when a single round trip already
    exceeds the battery budget) and the trace of fleet-doubling attempts.
    """

    def __init__(self, message, viewpoint_index=None, doubling_trace=None):
        super().__init__(message)
        self.viewpoint_index = viewpoint_index
        self.doubling_trace = list(doubling_trace or [])


class LayerOverflow(PlannerError):
    """Stacked transit layers would exceed the maximum allowed altitude."""


class RemoteUnavailable(PlannerError):
    """Remote elevation lookup failed (network, timeout, or bad response)."""


class GenerationFailed(PlannerError):
    """Random-polygon generation could not produce a valid sample."""


class OptimizationFailed(PlannerError):
    """One or more per-region viewpoint optimizations failed.

    ``failures`` maps region index to the underlying exception.
    """

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = dict(failures or {})
