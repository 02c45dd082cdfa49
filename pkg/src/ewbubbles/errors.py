"""Exception types raised across the package."""


class EWBubblesError(Exception):
    """Base class for every error raised by ewbubbles."""


class ParameterError(EWBubblesError, ValueError):
    """A domain value violates one of its invariants.

    ``field`` names the offending attribute so configuration loaders can
    report a dotted path.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


# physics
class NoBrokenMinimum(EWBubblesError, ValueError):
    pass


class NoTransition(EWBubblesError, ValueError):
    pass


class QuadratureFailure(EWBubblesError, ArithmeticError):
    pass


class DivergentRadius(EWBubblesError, ValueError):
    pass


class EmptyTable(EWBubblesError, ValueError):
    pass


class OutOfWindow(EWBubblesError, ValueError):
    pass


# stochastic
class ZeroMass(EWBubblesError, ValueError):
    pass


class NegativeDensity(EWBubblesError, ValueError):
    pass


# nucleation
class PlacementExhausted(EWBubblesError, RuntimeError):
    """No room was found for a scheduled bubble.

    ``events`` holds the bubbles placed before the failure.
    """

    def __init__(self, message, events=()):
        super().__init__(message)
        self.events = list(events)


class BeforeFormation(EWBubblesError, ValueError):
    pass


class TooFewEvents(EWBubblesError, ValueError):
    pass


# audio
class OutOfDomain(EWBubblesError, ValueError):
    pass


class OutOfRange(EWBubblesError, ValueError):
    pass


class NonPositiveDuration(EWBubblesError, ValueError):
    pass


class IoFailure(EWBubblesError, OSError):
    pass


# cli
class ConfigError(EWBubblesError, ValueError):
    """Configuration could not be parsed or validated.

    ``path`` is the dotted location of the bad value (empty when the whole
    document is unreadable).
    """

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


class ConfigParseError(ConfigError):
    pass


class ConfigValidationError(ConfigError):
    pass
