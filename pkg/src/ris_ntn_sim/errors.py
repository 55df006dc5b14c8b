"""Exception types shared across the simulator."""


class SimError(Exception):
    """Base class for all simulator errors."""


class InvalidInput(SimError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateGeometry(SimError, ValueError):
    """Two scenario nodes coincide; distances/delays are undefined."""


class ZeroSnr(SimError, ValueError):
    """A delay-variance model was asked for an SNR of zero (unbounded variance)."""


class SingularFim(SimError, ValueError):
    """The 2x2 position FIM is singular: the geometry is unobservable."""


class InvalidConfig(SimError, ValueError):
    """A structural configuration constraint is violated (e.g. codebook size)."""


class NoFeasibleCodeword(SimError, RuntimeError):
    """Every codeword in the codebook failed evaluation for this context."""


class ParseError(SimError, ValueError):
    """Config file could not be parsed; message carries line/field info."""


class ValidationError(SimError, ValueError):
    """Config invariants violated; message lists every violation."""
