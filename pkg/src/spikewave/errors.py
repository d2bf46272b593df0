"""Exception types shared across the toolkit."""


class ConfigError(ValueError):
    """Invalid or malformed configuration (bad key, violated invariant)."""


class InstabilityError(ArithmeticError):
    """Non-finite state encountered during integration.

    Carries enough context to locate the blow-up: layer index (when known),
    first offending neuron index, and simulation time.
    """

    def __init__(self, message, *, layer=None, neuron=None, t=None):
        super().__init__(message)
        self.layer = layer
        self.neuron = neuron
        self.t = t


class IdxError(ValueError):
    """Malformed IDX container file."""


class BadMagicError(IdxError):
    pass


class TruncatedError(IdxError):
    pass


class CountMismatchError(IdxError):
    pass
