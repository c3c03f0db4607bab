"""Benchmark the jitted kernels against the pure-numpy fallback.

Times the two hot kernels (Pauli-string matvec, spectral survival
amplitudes) on growing problem sizes and prints a speedup table.

    python benchmarks/bench_kernels.py [--repeats 7]

The package-level backend switch is LOSCHMIDT_KERNELS=numba|numpy; this
script calls both implementations directly, so it works regardless of
the switch.
"""

import argparse
import time

import numpy as np

from loschmidt import ChainSpec, build_tfim
from loschmidt import _kernels


def median_time(fn, repeats):
    fn()  # warmup (and jit compile)
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def bench_matvec(repeats):
    print("\nPauli-string matvec (chain Hamiltonian, dim = 2^L)")
    print(f"{'L':>3} {'terms':>6} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>8}")
    for L in (10, 12, 14, 16):
        H = build_tfim(ChainSpec(L, 1.3))
        rng = np.random.default_rng(L)
        psi = rng.normal(size=H.dim) + 1j * rng.normal(size=H.dim)
        args = (psi, H.x_masks, H.z_masks, H.coeffs)
        t_np = median_time(lambda: _kernels._pauli_matvec_numpy(*args), repeats)
        row = f"{L:>3} {len(H.paulis):>6} {1e3 * t_np:>12.3f}"
        if _kernels.HAS_NUMBA:
            t_nb = median_time(lambda: _kernels._pauli_matvec_numba(*args), repeats)
            row += f" {1e3 * t_nb:>12.3f} {t_np / t_nb:>8.1f}x"
        else:
            row += f" {'n/a':>12} {'n/a':>8}"
        print(row)


def bench_survival(repeats):
    print("\nSurvival amplitudes (n_times x dim spectral sum)")
    print(f"{'dim':>6} {'n_t':>6} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>8}")
    for dim, n_t in ((1024, 2001), (4096, 2001), (16384, 2001), (16384, 10001)):
        rng = np.random.default_rng(dim + n_t)
        w = rng.random(dim)
        w /= w.sum()
        E = np.sort(rng.normal(size=dim))
        t = np.linspace(0.0, 10.0, n_t)
        t_np = median_time(lambda: _kernels._survival_amplitudes_numpy(w, E, t), repeats)
        row = f"{dim:>6} {n_t:>6} {1e3 * t_np:>12.3f}"
        if _kernels.HAS_NUMBA:
            t_nb = median_time(lambda: _kernels._survival_amplitudes_numba(w, E, t), repeats)
            row += f" {1e3 * t_nb:>12.3f} {t_np / t_nb:>8.1f}x"
        else:
            row += f" {'n/a':>12} {'n/a':>8}"
        print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()
    print(f"numba available: {_kernels.HAS_NUMBA}; package backend: "
          f"{'numba' if _kernels.USE_NUMBA else 'numpy'}")
    bench_matvec(args.repeats)
    bench_survival(args.repeats)


if __name__ == "__main__":
    main()
