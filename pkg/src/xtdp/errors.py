"""Exception hierarchy shared by every layer of the package."""


class XTDPError(Exception):
    """Base class for all package errors."""


class NotPrime(XTDPError, ValueError):
    pass


class ZeroInverse(XTDPError, ZeroDivisionError):
    pass


class DimMismatch(XTDPError, ValueError):
    pass


class Singular(XTDPError, ArithmeticError):
    pass


class FieldTooSmall(XTDPError, ValueError):
    """The prime does not leave room for ``dim`` distinct nonzero eigenvalues."""


class ProtocolStateError(XTDPError):
    """A protocol step was invoked out of order or replayed."""


class WrongTokenOrigin(ProtocolStateError):
    pass


class Inconsistent(XTDPError):
    """The target is not a two-factor product over the given algebras."""


class InsufficientSamples(XTDPError, ValueError):
    pass


class CodecError(XTDPError, ValueError):
    pass


class MalformedFrame(XTDPError, ValueError):
    pass


class Truncated(MalformedFrame):
    """The byte stream ended inside a frame."""


class EntryOutOfRange(MalformedFrame):
    pass


class UnsupportedType(MalformedFrame):
    pass


class PeerProtocolError(XTDPError):
    pass


class TransportError(XTDPError, OSError):
    pass


class KeyMismatch(XTDPError):
    pass
