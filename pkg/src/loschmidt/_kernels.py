"""Hot numeric kernels with two interchangeable backends.

The two inner loops that dominate runtime are the bitwise Pauli-string
matvec (dimension 2^L) and the spectral survival-amplitude sum
(n_times x dim).  Both exist as a numba ``@njit(parallel=True)`` kernel
and as a pure-numpy fallback.  The backend is chosen once at import from
the environment variable ``LOSCHMIDT_KERNELS``:

    LOSCHMIDT_KERNELS=numba   force the jitted kernels (default when numba imports)
    LOSCHMIDT_KERNELS=numpy   force the vectorized numpy fallback

``benchmarks/bench_kernels.py`` times both backends side by side.
"""

import os

import numpy as np

try:
    from numba import njit, prange, set_num_threads

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False

    def set_num_threads(n):
        pass


_requested = os.environ.get("LOSCHMIDT_KERNELS", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"LOSCHMIDT_KERNELS={_requested!r}: expected 'numba' or 'numpy'"
    )
if _requested == "numba" and not HAS_NUMBA:
    raise ImportError("LOSCHMIDT_KERNELS=numba but numba is not importable")
USE_NUMBA = HAS_NUMBA if _requested == "" else _requested == "numba"


def set_threads(n):
    """Set the worker count for the parallel numba kernels (no-op on numpy)."""
    if HAS_NUMBA and n is not None and n > 0:
        set_num_threads(n)


# ---------------------------------------------------------------------------
# Pauli-string matvec.  A term is (x_mask, z_mask, coeff); acting on a basis
# state |n> it flips the bits in x_mask and contributes the sign
# (-1)^popcount(n & z_mask), so (H psi)[j] = sum_t c_t s_t(j^mx_t) psi[j^mx_t].
# ---------------------------------------------------------------------------


def _pauli_matvec_numpy(psi, x_masks, z_masks, coeffs):
    dim = psi.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    out = np.zeros(dim, dtype=np.complex128)
    for mx, mz, c in zip(x_masks, z_masks, coeffs):
        src = idx ^ mx
        signs = 1.0 - 2.0 * (np.bitwise_count(src & mz) & 1)
        out += c * signs * psi[src]
    return out


if HAS_NUMBA:

    @njit(parallel=True, cache=True)
    def _pauli_matvec_numba(psi, x_masks, z_masks, coeffs):  # pragma: no cover - jitted
        dim = psi.shape[0]
        n_terms = x_masks.shape[0]
        out = np.zeros(dim, dtype=np.complex128)
        for j in prange(dim):
            acc = 0.0 + 0.0j
            for t in range(n_terms):
                src = j ^ x_masks[t]
                v = src & z_masks[t]
                v ^= v >> 32
                v ^= v >> 16
                v ^= v >> 8
                v ^= v >> 4
                v ^= v >> 2
                v ^= v >> 1
                sign = 1.0 - 2.0 * (v & 1)
                acc += coeffs[t] * sign * psi[src]
            out[j] = acc
        return out


def pauli_matvec(psi, x_masks, z_masks, coeffs):
    """Apply a sum of {I,X,Z} Pauli strings (given as bit masks) to psi."""
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    if USE_NUMBA:
        return _pauli_matvec_numba(psi, x_masks, z_masks, coeffs)
    return _pauli_matvec_numpy(psi, x_masks, z_masks, coeffs)


# ---------------------------------------------------------------------------
# Survival amplitude from spectral data: amp(t) = sum_k w_k exp(-i E_k t).
# The numpy fallback chunks over times to keep the outer-product matrix small.
# ---------------------------------------------------------------------------


def _survival_amplitudes_numpy(weights, energies, times, chunk=512):
    amp = np.empty(times.shape[0], dtype=np.complex128)
    for lo in range(0, times.shape[0], chunk):
        hi = min(lo + chunk, times.shape[0])
        amp[lo:hi] = np.exp(-1j * np.outer(times[lo:hi], energies)) @ weights
    return amp


if HAS_NUMBA:

    @njit(parallel=True, cache=True)
    def _survival_amplitudes_numba(weights, energies, times):  # pragma: no cover - jitted
        n_t = times.shape[0]
        n_k = energies.shape[0]
        amp = np.empty(n_t, dtype=np.complex128)
        for i in prange(n_t):
            re = 0.0
            im = 0.0
            t = times[i]
            for k in range(n_k):
                ph = energies[k] * t
                re += weights[k] * np.cos(ph)
                im -= weights[k] * np.sin(ph)
            amp[i] = re + 1j * im
        return amp


def survival_amplitudes(weights, energies, times):
    """Return sum_k w_k exp(-i E_k t) for every t (w_k real, E_k real)."""
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    energies = np.ascontiguousarray(energies, dtype=np.float64)
    times = np.ascontiguousarray(times, dtype=np.float64)
    if USE_NUMBA:
        return _survival_amplitudes_numba(weights, energies, times)
    return _survival_amplitudes_numpy(weights, energies, times)
