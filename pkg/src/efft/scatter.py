"""Stage I: reorder the input into contiguous bins of the scratch buffer.

Element i*b + j of the input lands in bin bit_reverse(j) at offset i, which
is exactly s rounds of even/odd separation collapsed into one pass.  The
work is split over contiguous ranges of i-tiles (about 8 tasks per worker);
within a task, each bin's run is written unit-stride while the input is read
with stride b, the cache-friendly order for b much smaller than the bin size.
"""

import numpy as np

from .errors import SizeMismatch
from .parallel import chunk_ranges

TASKS_PER_WORKER = 8


def build_scatter_index(splits: int) -> np.ndarray:
    """Bit-reversal permutation over `splits` bits; its own inverse."""
    if splits < 0:
        raise ValueError("splits must be >= 0")
    idx = np.arange(1 << splits, dtype=np.int64)
    rev = np.zeros_like(idx)
    for _ in range(splits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    rev.setflags(write=False)
    return rev


def scatter(input_buf: np.ndarray, scratch_buf: np.ndarray, plan, pool=None) -> None:
    """Permute input_buf into scratch_buf according to the plan's bin map."""
    n = plan.n
    if input_buf.shape != (n,) or scratch_buf.shape != (n,):
        raise SizeMismatch(
            f"buffers must have length {n}, got {input_buf.shape} and {scratch_buf.shape}"
        )
    if not np.all(np.isfinite(input_buf)):
        raise ValueError("input contains non-finite values")

    bins = plan.bins
    binsize = plan.binsize
    sidx = plan.scatter_index
    src = input_buf.reshape(binsize, bins)
    dst = scratch_buf.reshape(bins, binsize)

    def body(lo, hi):
        block = src[lo:hi, :]
        for j in range(bins):
            dst[sidx[j], lo:hi] = block[:, j]

    chunks = chunk_ranges(0, binsize, plan.i_tile, TASKS_PER_WORKER * plan.workers)
    if pool is None or plan.workers == 1:
        for lo, hi in chunks:
            body(lo, hi)
    else:
        pool.parallel_for(chunks, body)
