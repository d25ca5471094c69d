"""Exception hierarchy shared by the library and the command line.

Every error the library raises on purpose derives from ``BBMVotingError`` and
carries the exit code the CLI reports for it: 1 for invalid input, 2 for
runtime/resource failures, 3 for a failed acceptance comparison.
"""

from typing import Optional


class BBMVotingError(Exception):
    """Base class for all deliberate failures."""

    exit_code = 2


class ValidationError(BBMVotingError):
    """Input violates a documented precondition."""

    exit_code = 1


class DegreeMismatchError(ValidationError):
    pass


class BoundaryConditionError(ValidationError):
    """f(0) or f(1) is not zero where a voting model requires it."""

    def __init__(self, value_at_0: float, value_at_1: float):
        self.value_at_0 = value_at_0
        self.value_at_1 = value_at_1
        super().__init__(
            f"voting models need f(0) = f(1) = 0, got f(0) = {value_at_0:.3g}, "
            f"f(1) = {value_at_1:.3g}"
        )


class RateTooSmallError(ValidationError):
    """A rate override pushes some alpha_k outside [0, 1]."""

    def __init__(self, k: int, alpha: float, rate: float):
        self.k = k
        self.alpha = alpha
        self.rate = rate
        super().__init__(
            f"rate {rate:g} is too small: alpha_{k} = {alpha:.6g} is outside [0, 1]"
        )


class MonotonicityError(ValidationError):
    """A threshold model needs alpha nondecreasing in k."""

    def __init__(self, k: int, zeta: float, rate: Optional[float] = None):
        self.k = k
        self.zeta = zeta
        self.rate = rate
        where = f" at rate {rate:g}" if rate is not None else ""
        super().__init__(
            f"alpha is not monotone{where}: zeta_{k} = {zeta:.6g} < 0"
        )


class ParameterRangeError(ValidationError):
    """A catalog or model parameter is out of range; ``inequality`` names the rule."""

    def __init__(self, message: str, inequality: str = ""):
        self.inequality = inequality
        text = f"{message} (violates {inequality})" if inequality else message
        super().__init__(text)


class UnknownModelError(ValidationError):
    pass


class DatumRangeError(ValidationError):
    pass


class ConfigError(ValidationError):
    """Configuration could not be parsed; ``location`` is file[:line] or file:field."""

    def __init__(self, message: str, location: str = ""):
        self.message = message
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class RuntimeFailure(BBMVotingError):
    exit_code = 2


class PopulationGuardError(RuntimeFailure):
    """A replicate grew past the configured leaf cap."""

    def __init__(self, cap: int, expected: Optional[float] = None):
        self.cap = cap
        self.expected = expected
        hint = f" (expected population {expected:.4g})" if expected is not None else ""
        super().__init__(
            f"population guard exceeded: more than {cap} leaves in one tree{hint}; "
            f"raise the cap or shorten t"
        )

    def __reduce__(self):
        # raised inside pool workers, so it must survive pickling
        return (type(self), (self.cap, self.expected))


class NonFiniteValueError(RuntimeFailure):
    def __init__(self, replicate: int, value: float):
        self.replicate = replicate
        self.value = value
        super().__init__(
            f"replicate {replicate} produced a non-finite root value ({value}); "
            f"the recursive representation overflowed, reduce t"
        )


class InstabilityError(RuntimeFailure):
    def __init__(self, t: float, suggested_dt: float):
        self.t = t
        self.suggested_dt = suggested_dt
        super().__init__(
            f"solver produced non-finite values at t = {t:.6g}; "
            f"retry with dt <= {suggested_dt:.3g}"
        )


class FitError(RuntimeFailure):
    pass


class NoCrossingError(RuntimeFailure):
    pass


class AcceptanceFailure(BBMVotingError):
    exit_code = 3
