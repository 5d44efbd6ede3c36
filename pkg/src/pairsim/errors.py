"""Exception hierarchy shared by all modules."""


class PairsimError(Exception):
    """Base class for errors raised by pairsim."""


class ValidationError(PairsimError, ValueError):
    """Malformed input: bad shapes, asymmetric matrices, out-of-range indices."""


class CapExceededError(PairsimError):
    """Requested dense object is larger than the desk-scale caps allow."""


class UnsupportedModelError(PairsimError):
    """The model has a feature the requested operation cannot handle (e.g. V^- != 0)."""


class UnreachableTargetError(PairsimError):
    """A search (e.g. for a quasi-adiabatic ramp time) cannot hit its target."""


class InsufficientPeaksError(PairsimError):
    """Spectrum does not contain the lines needed to estimate a gap."""
