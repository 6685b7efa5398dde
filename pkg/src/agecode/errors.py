"""Exception types shared across the library."""


class AgecodeError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSourceError(AgecodeError):
    """Alphabet or probability vector is not a valid source description."""


class AlignmentError(AgecodeError):
    """Two per-symbol sequences that must be aligned have different shapes."""


class InfeasibleLengthsError(AgecodeError):
    """No prefix-free code exists for the requested length constraints."""


class StabilityError(AgecodeError):
    """The queue cannot be stable for the given code and arrival rate.

    Carries enough context for callers to report how far from stable the
    configuration is: `mean_service` is the offered mean service time in
    slots, `capacity` is the slot budget per arrival (1/q).
    """

    def __init__(self, message, mean_service=None, capacity=None):
        super().__init__(message)
        self.mean_service = mean_service
        self.capacity = capacity


class DegenerateLoadError(AgecodeError):
    """Null-symbol probability fell outside (0, 1); system idle share is degenerate."""


class OracleSizeError(AgecodeError):
    """Brute-force enumeration refused: instance too large to enumerate safely."""


class ConfigError(AgecodeError):
    """Invalid simulation or sweep configuration."""


class EmptySampleError(AgecodeError):
    """A statistic was requested from a run that produced no usable samples."""


class FormatError(AgecodeError):
    """A text artifact (source spec, codebook, sweep spec, ...) failed to parse."""
