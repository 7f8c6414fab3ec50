"""Exception types raised across the simulator."""


class AbiotError(Exception):
    """Base class for simulator errors."""


class ConfigError(AbiotError, ValueError):
    """Invalid configuration value. ``key`` is the dotted config path when known."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class UndefinedMetricError(AbiotError, ValueError):
    pass


class SingularDistanceError(AbiotError, ValueError):
    pass


class DegenerateRegionError(AbiotError, ValueError):
    pass


class OverPartitionError(AbiotError, ValueError):
    pass


class NegotiationTimeout(AbiotError):
    """Negotiation did not settle. Carries the last assignments and trace for diagnosis."""

    def __init__(self, message, assignments=None, trace=None, report=None):
        super().__init__(message)
        self.assignments = assignments
        self.trace = trace
        self.report = report


class PartitionRefused(AbiotError):
    """A coordinated run was refused because the partition has overlap or gaps."""

    def __init__(self, report, message="partition has overlap or vacant area"):
        super().__init__(f"{message}: {report}")
        self.report = report


class CalibrationFailure(AbiotError):
    def __init__(self, result):
        super().__init__("no calibration candidate within tolerance")
        self.result = result
