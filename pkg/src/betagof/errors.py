"""Exception hierarchy shared by all modules."""


class BetaGofError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BetaGofError, ValueError):
    """An argument lies outside the domain of a function."""


class SampleError(BetaGofError, ValueError):
    """Input data cannot be used as a sample (empty, NaN, outside [0, 1])."""


class NonInteriorData(SampleError):
    """Maximum likelihood needs every observation strictly inside (0, 1)."""


class DegenerateSample(SampleError):
    """The sample carries no information about the shape (e.g. constant data)."""


class DegenerateTransform(SampleError):
    """A probability integral transform hit 0 or 1 where a logarithm is needed."""


class NoConvergence(BetaGofError, RuntimeError):
    """An iterative solver reached its iteration cap."""


class SpecParseError(BetaGofError, ValueError):
    """Malformed alternative-distribution spec string."""

    def __init__(self, message, text="", position=None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} at position {position} in {text!r}"
        super().__init__(message)


class ConfigError(BetaGofError, ValueError):
    """Invalid power-study configuration."""
