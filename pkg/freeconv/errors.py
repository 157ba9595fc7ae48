"""
Exception hierarchy for the free convolution engine.

Every error carries the CLI exit code it maps to:
    - 2 : bad input (measure specs, out-of-domain evaluation)
    - 3 : solver failure (non-convergence, bracketing, real-axis exit)
    - 1 : a validation tolerance was not met
"""

from typing import List, Tuple


class FreeConvError(Exception):
    """Base class for all engine errors."""
    exit_code = 1


# ── Input errors ─────────────────────────────────────────────────────────────


class SpecError(FreeConvError):
    """A measure specification or run configuration failed validation."""
    exit_code = 2


class ExponentOutOfRange(SpecError):
    pass


class NonPositiveSmoothFactor(SpecError):
    pass


class EvaluationOnSupport(FreeConvError):
    """A transform was requested at a real point inside the closed support."""
    exit_code = 2


class TooCloseToSupport(FreeConvError):
    """The evaluation point is closer to the support than the certified floor."""
    exit_code = 2


class OutOfSupport(FreeConvError):
    exit_code = 2


class QuantileFailure(FreeConvError):
    exit_code = 2


# ── Solver errors ────────────────────────────────────────────────────────────


class SolverError(FreeConvError):
    exit_code = 3


class NoConvergence(SolverError):
    pass


class LeftRealAxis(SolverError):
    """Real-axis iterates left the exterior gap, so E lies inside the support."""
    pass


class BracketFailure(SolverError):
    pass


class NonNegativeSecondDerivative(SolverError):
    """The oriented edge curvature has the wrong sign (edge not converged)."""
    pass


class GridSolveError(SolverError):
    """Aggregates per-point failures of a batch solve."""

    def __init__(self, failures: List[Tuple[int, Exception]]):
        self.failures = failures
        detail = "; ".join(f"[{i}] {type(e).__name__}: {e}" for i, e in failures[:5])
        more = f" (+{len(failures) - 5} more)" if len(failures) > 5 else ""
        super().__init__(f"{len(failures)} grid point(s) failed: {detail}{more}")


# ── Validation ───────────────────────────────────────────────────────────────


class ToleranceFailure(FreeConvError):
    exit_code = 1
