"""Reference transforms and accuracy metrics, all in double precision.

Everything here is deliberately independent of the fast path: coefficients
come from direct summation of x_n * exp(-2*pi*i*k*n/M), never from any FFT,
so these functions can arbitrate the engine's output.  Phase arguments are
reduced with exact integer arithmetic ((k*n) mod M) before the multiply by
2*pi/M, which keeps the oracle accurate even at M in the tens of millions.
"""

import functools

import numpy as np

from .errors import IndexOutOfRange, NotRealSpectrum, ZeroReference

# Coefficients are accumulated chunk by chunk in a fixed order so that
# naive_dft and naive_dft_at always agree bitwise; below this size a
# precomputed root-of-unity table makes the full transform affordable.
_CHUNK = 1 << 16
_TABLE_LIMIT = 1 << 16


def _roots_table(m: int) -> np.ndarray:
    angles = np.arange(m, dtype=np.float64) * (-2.0 * np.pi / m)
    return np.exp(1j * angles)


@functools.lru_cache(maxsize=4)
def _index_lane(m: int) -> np.ndarray:
    idx = np.arange(m, dtype=np.int64)
    idx.setflags(write=False)
    return idx


def _coefficient(x64: np.ndarray, k: int, roots) -> complex:
    """Direct evaluation of coefficient k; identical path for all callers."""
    m = x64.shape[0]
    idx = _index_lane(m)
    pow2 = m & (m - 1) == 0
    total = 0.0 + 0.0j
    for lo in range(0, m, _CHUNK):
        hi = min(lo + _CHUNK, m)
        # (k*n) mod m, exact in int64; the mask form is just faster.
        if pow2:
            residues = (k * idx[lo:hi]) & (m - 1)
        else:
            residues = (k * idx[lo:hi]) % m
        if roots is not None:
            phases = roots[residues]
        else:
            phases = np.exp(1j * (residues.astype(np.float64) * (-2.0 * np.pi / m)))
        total += complex(np.sum(x64[lo:hi] * phases))
    return total


def _check_input(x) -> np.ndarray:
    x64 = np.asarray(x, dtype=np.float64)
    if x64.ndim != 1 or x64.shape[0] < 2 or x64.shape[0] % 2 != 0:
        raise ValueError("reference transform needs a 1-D sequence of even length >= 2")
    if not np.all(np.isfinite(x64)):
        raise ValueError("reference transform input must be finite")
    return x64


def naive_dft(x) -> np.ndarray:
    """All coefficients k = 0..M/2 of the direct transform of a real sequence.

    Runs in O(M^2); intended for desk-scale references only.
    """
    x64 = _check_input(x)
    m = x64.shape[0]
    roots = _roots_table(m) if m <= _TABLE_LIMIT else None
    out = np.empty(m // 2 + 1, dtype=np.complex128)
    for k in range(m // 2 + 1):
        out[k] = _coefficient(x64, k, roots)
    return out


def naive_dft_at(x, k: int) -> complex:
    """Single coefficient of the direct transform, in O(M).

    Exactly equal to naive_dft(x)[k]: both run the same summation.
    """
    x64 = _check_input(x)
    m = x64.shape[0]
    if not 0 <= k <= m // 2:
        raise IndexOutOfRange(f"coefficient index {k} outside [0, {m // 2}]")
    roots = _roots_table(m) if m <= _TABLE_LIMIT else None
    return _coefficient(x64, int(k), roots)


def pack_perm(coeffs) -> np.ndarray:
    """Pack coefficients k = 0..M/2 into the length-M packed layout.

    Layout: [R_0, R_{M/2}, R_1, I_1, ..., R_{M/2-1}, I_{M/2-1}].  The DC and
    Nyquist coefficients must be real (up to 1e-9 of the spectrum's L2 scale),
    as they are for any real input.
    """
    f = np.asarray(coeffs, dtype=np.complex128)
    if f.ndim != 1 or f.shape[0] < 2:
        raise ValueError("need coefficients for k = 0..M/2 with M >= 2")
    m = 2 * (f.shape[0] - 1)
    scale = np.sqrt(np.sum(np.abs(f) ** 2))
    limit = 1e-9 * (scale if scale > 0 else 1.0)
    if abs(f[0].imag) > limit or abs(f[-1].imag) > limit:
        raise NotRealSpectrum("F_0 and F_{M/2} must be real for a real input")
    packed = np.empty(m, dtype=np.float64)
    packed[0] = f[0].real
    packed[1] = f[-1].real
    packed[2::2] = f[1:-1].real
    packed[3::2] = f[1:-1].imag
    return packed


def l2_norm(computed, exact) -> float:
    """Relative root-sum-square deviation over packed slots.

    sqrt(sum((F_k - F_k^e)^2)) / sqrt(sum((F_k^e)^2)), in double precision.
    """
    a = np.asarray(computed, dtype=np.float64)
    b = np.asarray(exact, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    denom = np.sqrt(np.sum(b * b))
    if denom == 0.0:
        raise ZeroReference("reference spectrum has zero norm")
    return float(np.sqrt(np.sum((a - b) ** 2)) / denom)
