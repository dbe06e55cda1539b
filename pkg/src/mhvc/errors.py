"""Exception taxonomy shared across the codec."""


class CodecError(Exception):
    """Base class for all codec-level failures."""


class TruncatedFile(CodecError):
    """Raw input file holds fewer bytes than a single frame."""


class DimensionMismatch(CodecError):
    """Operands disagree in size, or a size violates an alignment requirement."""


class WrongColorspace(CodecError):
    """Operation applied to a frame in an unsupported colorspace."""


class InsufficientReferences(CodecError):
    """The decoded frame buffer holds no reference usable by the requested structure."""


class BitstreamExhausted(CodecError):
    """Entropy decoder ran past the end of its payload."""


class MalformedHeader(CodecError):
    """Container header fails validation (bad magic, impossible field, trailing junk)."""


class UnknownVersion(MalformedHeader):
    """Container version byte is not one this build can decode."""


class KeyIndexOutOfRange(CodecError):
    """Signaled reference choice does not address an available candidate."""


class PayloadTruncated(CodecError):
    """A frame record declares more payload bytes than the stream holds.

    ``decoded_frames`` carries any frames successfully decoded before the
    truncation point.
    """

    def __init__(self, message, decoded_frames=None):
        super().__init__(message)
        self.decoded_frames = decoded_frames if decoded_frames is not None else []
