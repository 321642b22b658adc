"""Exception types shared across the package."""


class BlockLcsError(Exception):
    """Base class for all package-specific errors."""


class InvalidTzr(BlockLcsError):
    """The (t, z, r) triple does not correspond to non-negative integer
    block counts for the given (l, n)."""


class TooLarge(BlockLcsError):
    """An exact enumeration would exceed the configured cap."""


class InputTooLarge(BlockLcsError):
    """A string exceeds the configured LCS input cap."""


class NoModifiableBlocks(BlockLcsError):
    """No block of the required length is available for a modification."""


class EmptyDomain(BlockLcsError):
    """The domain contains no admissible (t, z, r) triple."""


class NoAdmissibleZ(BlockLcsError):
    """No z in the domain admits valid block counts for the given (t, r)."""


class MisalignedInput(BlockLcsError):
    """Aligned sequences passed to an operation have mismatched lengths."""


class SpecViolation(BlockLcsError):
    """A slope-map fixture fails its own slope conditions."""
