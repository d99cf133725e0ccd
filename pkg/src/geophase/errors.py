"""Exception hierarchy shared by all geophase modules."""


class GeophaseError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GeophaseError, ValueError):
    """An input violates a documented precondition."""


class ConfigError(ValidationError):
    """A run configuration is malformed or inconsistent."""


class GapViolation(GeophaseError):
    """The tracked eigenvalue came closer than ``gap_min`` to another one.

    The adiabatic picture is meaningless past this point, so the offending
    step index is kept for the caller.
    """

    def __init__(self, step, gap, gap_min):
        self.step = step
        self.gap = gap
        self.gap_min = gap_min
        super().__init__(f"spectral gap {gap:.3e} below gap_min={gap_min:.3e} at step {step}")


class StepTooCoarse(GeophaseError):
    """Consecutive samples are too far apart to be connected reliably."""

    def __init__(self, step, detail=""):
        self.step = step
        msg = f"step {step} too coarse"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NumericalBlowup(GeophaseError):
    """An integrator produced a non-finite state."""

    def __init__(self, step):
        self.step = step
        super().__init__(f"non-finite state at step {step}")


class DegenerateDensity(GeophaseError):
    """Zero variance: the transition density is a point mass."""
