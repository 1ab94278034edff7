"""Exception hierarchy shared by every stage of the pipeline."""


class MvstegError(Exception):
    """Base class for all errors raised by this package."""


class TruncatedFile(MvstegError):
    pass


class DimensionNotMacroblockAligned(MvstegError):
    pass


class InvalidQp(MvstegError):
    pass


class EmptyVideo(MvstegError):
    pass


class MalformedStream(MvstegError):
    """Stream bytes or records violate the container framing.

    ``offset`` is the byte position where parsing failed, or ``None`` when the
    defect was found after parsing (e.g. an MVP that disagrees with the
    neighbourhood).
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class MagicMismatch(MalformedStream):
    pass


class VersionUnsupported(MalformedStream):
    pass


class RateTooHigh(MvstegError):
    pass


class NoSkipBlocks(MvstegError):
    pass


class SingleClassInput(MvstegError):
    pass


class TooFewPairs(MvstegError):
    pass


class ConfigError(MvstegError):
    pass
