"""Exception types raised by the transform library."""


class EfftError(Exception):
    """Base class for all library errors."""


class SizeConstraintViolation(EfftError, ValueError):
    """Transform size is not a multiple of 2**(splits+8) outside test mode."""


class BinsizeNotPowerOfTwo(EfftError, ValueError):
    """n / 2**splits is not a power of two >= 4, so no built-in leaf fits."""


class SplitsTooLarge(EfftError, ValueError):
    """2**splits exceeds the transform size."""


class AllocationFailure(EfftError, MemoryError):
    """An aligned signal buffer could not be allocated."""


class SizeMismatch(EfftError, ValueError):
    """A buffer passed to a kernel has the wrong length."""


class IndexOutOfRange(EfftError, IndexError):
    """Requested coefficient index lies outside [0, M/2]."""


class NotRealSpectrum(EfftError, ValueError):
    """Spectrum packing requires real F_0 and F_{M/2}."""


class ZeroReference(EfftError, ValueError):
    """Relative L2 norm is undefined against an all-zero reference."""


class NonPositiveSize(EfftError, ValueError):
    """The FLOP model needs a positive transform size."""


class MissingBaseline(EfftError, ValueError):
    """Parallel efficiency needs a single-worker performance entry."""
