"""Exception types shared across the package."""


class OpstegError(Exception):
    """Base class for all errors raised by this package."""


# -- PDF file layer ------------------------------------------------------------

class MalformedHeader(OpstegError):
    """Input does not start with a %PDF- header."""


class UnbalancedObject(OpstegError):
    """An `obj` keyword without a matching `endobj`."""


class ObjectStreamsPresent(OpstegError):
    """The file packs objects into /ObjStm streams, which this parser does not
    read.  Expand them first, e.g. `qpdf in.pdf --stream-data=uncompress out.pdf`."""


class UnsupportedFilter(OpstegError):
    """Stream uses a filter (or predictor) outside {none, /FlateDecode}."""


class CorruptStream(OpstegError):
    """Stream data failed to inflate."""


class UnknownObject(OpstegError):
    """Object id not present in the document."""


# -- Scanner -------------------------------------------------------------------

class NoOperands(OpstegError):
    """A non-TJ operator match produced zero numeric tokens (scanner bug)."""


class SpanOutOfRange(OpstegError):
    """Splice target span does not fit in the stream."""


# -- Registry / config ---------------------------------------------------------

class ParseError(OpstegError):
    """Config or fixture-spec text could not be parsed."""


class ConfigMismatch(OpstegError):
    """Config references an unknown operator, or embed/extract configs differ."""


# -- Codec ---------------------------------------------------------------------

class PayloadTooLarge(OpstegError):
    """Payload length does not fit in the 32-bit framing header."""


class InsufficientCapacity(OpstegError):
    """Cover document cannot hold the framed payload."""

    def __init__(self, required_bits: int, available_bits: int):
        self.required_bits = required_bits
        self.available_bits = available_bits
        super().__init__(
            f"payload needs {required_bits} bits, cover offers {available_bits} bits"
        )


class TruncatedMessage(OpstegError):
    """Document ran out of eligible operands before the full message was read."""


class ImplausibleLength(OpstegError):
    """Decoded length header exceeds document capacity; wrong config or not a
    stego document."""
