"""Exception types shared across the compiler."""


class LcscError(Exception):
    """Base class for all compiler errors."""


class DimensionMismatch(LcscError):
    pass


class UnknownLabel(LcscError):
    pass


class EmptyInstance(LcscError):
    pass


class InstructionError(LcscError):
    """Raised when an InstructionSet violates a construction invariant."""


class MissingKey(LcscError):
    pass


class OverlapWrite(LcscError):
    pass


class DegenerateBox(LcscError):
    pass


class ConfigError(LcscError):
    pass


class StoreError(LcscError):
    """Base class for serialization errors."""


class BadMagic(StoreError):
    pass


class VersionUnsupported(StoreError):
    pass


class ChecksumMismatch(StoreError):
    pass


class ParseError(StoreError):
    pass


class SerializationOverflow(StoreError):
    pass
