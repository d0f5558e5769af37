"""Exception types raised across the package."""


class BatteryError(Exception):
    """Base class for all errors raised by qbattery."""


class InvalidParams(BatteryError, ValueError):
    pass


class DegenerateDivision(BatteryError, ZeroDivisionError):
    """A closed-form expression hit a pole with no physical limit."""


class UnsupportedDetuning(BatteryError, ValueError):
    pass


class NoSteadyState(BatteryError):
    """The dissipative dynamics diverge, so no steady state exists."""


class SingularSystem(BatteryError):
    pass


class NonPhysicalState(BatteryError):
    pass


class StepSizeUnderflow(BatteryError):
    pass


class DegenerateNullSpace(BatteryError):
    pass


class ConvergenceFailure(BatteryError):
    pass


class ParseError(BatteryError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(BatteryError, ValueError):
    pass


class OutputError(BatteryError, OSError):
    """Writing sweep output failed."""
