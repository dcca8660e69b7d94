"""Transform plans, signal buffers, and the packed-spectrum layout contract.

A plan fixes one transform configuration: size n, number of radix-2 splits
s, the derived bin count b = 2**s and bin size m = n/b, the bit-reversal
bin map, the two tile lengths, and the worker count.  A handle owns the
64-byte-aligned input and scratch buffers for a plan plus one private leaf
kernel per worker, and is meant to be created once and reused for any
number of transforms.

Packed spectrum layout (length-M real buffer for a length-M real input):

    [R_0, R_{M/2}, R_1, I_1, R_2, I_2, ..., R_{M/2-1}, I_{M/2-1}]

Coefficients above M/2 are implied by conjugate symmetry F_{M-k} = F_k*.
"""

import weakref
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BinsizeNotPowerOfTwo,
    IndexOutOfRange,
    SizeConstraintViolation,
    SplitsTooLarge,
)
from .leaf_dft import Radix2LeafKernel, _is_pow2
from .memory import aligned_empty
from .parallel import WorkerPool, chunk_ranges
from .scatter import build_scatter_index

DEFAULT_I_TILE = 16
DEFAULT_K_TILE = 64

# Production sizes must be multiples of 2**(splits + SIZE_GRAIN_BITS); the
# constraint exists for tiling efficiency, so test mode may relax it down
# to the smallest leaf the built-in kernel supports.
SIZE_GRAIN_BITS = 8
MIN_LEAF = 4


@dataclass(frozen=True, eq=False)
class TransformPlan:
    n: int
    splits: int
    bins: int
    binsize: int
    scatter_index: np.ndarray = field(repr=False)
    i_tile: int
    k_tile: int
    workers: int
    test_mode: bool = False

    def __repr__(self):
        return (
            f"TransformPlan(n={self.n}, splits={self.splits}, bins={self.bins}, "
            f"binsize={self.binsize}, i_tile={self.i_tile}, k_tile={self.k_tile}, "
            f"workers={self.workers}, test_mode={self.test_mode})"
        )


def plan_create(
    n: int,
    splits: int,
    workers: int = 1,
    *,
    test_mode: bool = False,
    i_tile: int = DEFAULT_I_TILE,
    k_tile: int = DEFAULT_K_TILE,
) -> TransformPlan:
    """Validate a configuration and derive its bins, bin size, and bin map.

    Outside test mode, n must be a multiple of 2**(splits+8).  In either
    mode n / 2**splits must be a power of two >= 4, the sizes the built-in
    leaf kernel accepts.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if splits < 0:
        raise ValueError("splits must be >= 0")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if i_tile < 1 or k_tile < 1:
        raise ValueError("tile lengths must be >= 1")

    bins = 1 << splits
    if bins > n:
        raise SplitsTooLarge(f"2**{splits} bins exceed transform size {n}")
    if not test_mode and n % (1 << (splits + SIZE_GRAIN_BITS)) != 0:
        raise SizeConstraintViolation(
            f"n={n} is not a multiple of 2**{splits + SIZE_GRAIN_BITS}; "
            f"pass test_mode=True to relax (test sizes only)"
        )
    binsize = n // bins
    if binsize * bins != n or not _is_pow2(binsize) or binsize < MIN_LEAF:
        raise BinsizeNotPowerOfTwo(
            f"bin size {n}/{bins} must be a power of two >= {MIN_LEAF} "
            f"for the built-in leaf kernel"
        )
    return TransformPlan(
        n=n,
        splits=splits,
        bins=bins,
        binsize=binsize,
        scatter_index=build_scatter_index(splits),
        i_tile=i_tile,
        k_tile=k_tile,
        workers=workers,
        test_mode=test_mode,
    )


class TransformHandle:
    """Owns the buffers, worker pool, and per-worker leaf kernels of a plan.

    Creation allocates both aligned buffers and first-touches each region
    from the worker that will predominantly process it, then instantiates
    one leaf kernel per worker.  All of that is reused across transforms;
    running one never reallocates.

    A handle belongs to one logical owner at a time: it may move between
    threads but must not be used by two callers at once.
    """

    def __init__(self, plan: TransformPlan):
        self.plan = plan
        self._input = aligned_empty(plan.n)
        self._scratch = aligned_empty(plan.n)
        self._pool = WorkerPool(plan.workers)
        self._kernels = [Radix2LeafKernel(plan.binsize) for _ in range(plan.workers)]
        self._result = self._scratch.view()
        self._result.setflags(write=False)
        self._finalizer = weakref.finalize(self, WorkerPool.shutdown, self._pool)
        self._first_touch()

    def _first_touch(self):
        regions = chunk_ranges(0, self.plan.n, 1, self.plan.workers)

        def touch(lo, hi):
            self._input[lo:hi] = 0.0
            self._scratch[lo:hi] = 0.0

        self._pool.parallel_for(regions, touch)

    @property
    def data(self) -> np.ndarray:
        """Writable view of the input buffer; preserved across transforms."""
        return self._input

    @property
    def result(self) -> np.ndarray:
        """Read-only view of the scratch buffer holding the packed spectrum.

        Undefined until the first transform has run.
        """
        return self._result

    @property
    def pool(self) -> WorkerPool:
        return self._pool

    def kernel_for_current_worker(self) -> Radix2LeafKernel:
        return self._kernels[self._pool.current_slot()]

    def run(self) -> np.ndarray:
        """Transform the input buffer; returns the result view."""
        from .recombine import run_transform

        return run_transform(self)

    def close(self) -> None:
        """Stop the worker pool; the handle is unusable afterwards."""
        self._finalizer()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def handle_create(plan: TransformPlan) -> TransformHandle:
    """Allocate buffers and kernels for a plan; reuse the handle for all runs."""
    return TransformHandle(plan)


def data_view(handle: TransformHandle) -> np.ndarray:
    """Writable view of the handle's input buffer."""
    return handle.data


def result_view(handle: TransformHandle) -> np.ndarray:
    """Read-only view of the handle's output buffer."""
    return handle.result


class PermSpectrum:
    """Interpretation of a length-M packed real buffer as M/2+1 coefficients."""

    def __init__(self, packed: np.ndarray):
        packed = np.asarray(packed)
        if packed.ndim != 1 or packed.shape[0] < 2 or packed.shape[0] % 2 != 0:
            raise ValueError("packed spectrum must be 1-D with even length >= 2")
        self.packed = packed

    def __len__(self) -> int:
        return self.packed.shape[0]

    @property
    def dc(self) -> float:
        return float(self.packed[0])

    @property
    def nyquist(self) -> float:
        return float(self.packed[1])

    def coefficient(self, k: int) -> complex:
        """Coefficient F_k for 0 <= k < M, using conjugate symmetry above M/2."""
        m = self.packed.shape[0]
        if not 0 <= k < m:
            raise IndexOutOfRange(f"coefficient index {k} outside [0, {m})")
        if k == 0:
            return complex(self.packed[0])
        if k == m // 2:
            return complex(self.packed[1])
        if k > m // 2:
            return self.coefficient(m - k).conjugate()
        return complex(float(self.packed[2 * k]), float(self.packed[2 * k + 1]))

    def to_complex(self) -> np.ndarray:
        """Unpack to coefficients k = 0..M/2 as complex128."""
        m = self.packed.shape[0]
        out = np.empty(m // 2 + 1, dtype=np.complex128)
        out[0] = self.packed[0]
        out[-1] = self.packed[1]
        out.real[1:-1] = self.packed[2::2]
        out.imag[1:-1] = self.packed[3::2]
        return out

    def to_full_complex(self) -> np.ndarray:
        """Unpack to all M coefficients via conjugate symmetry."""
        half = self.to_complex()
        m = self.packed.shape[0]
        out = np.empty(m, dtype=np.complex128)
        out[: m // 2 + 1] = half
        out[m // 2 + 1:] = np.conj(half[-2:0:-1])
        return out
