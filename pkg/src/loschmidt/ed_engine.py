"""Exact spectral decomposition, time evolution, and Loschmidt traces.

Everything here is the brute-force reference path: full diagonalization
(dense, capped at dimension 2^14), spectral propagation, and a Lanczos
propagator for term-list Hamiltonians past the dense cap.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import _kernels
from .spin_hamiltonian import PauliHamiltonian, spin_flip

DIM_CAP = 1 << 14
HERMITICITY_TOL = 1e-12
DEGENERACY_GAP = 1e-10


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid [t_start, t_end] with n_points samples."""

    t_start: float
    t_end: float
    n_points: int

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError("need t_start < t_end")
        if self.n_points < 2:
            raise ValueError("need n_points >= 2")

    @property
    def times(self):
        return np.linspace(self.t_start, self.t_end, self.n_points)

    @property
    def dt(self):
        return (self.t_end - self.t_start) / (self.n_points - 1)


@dataclass
class LoschmidtTrace:
    """Sampled echo L(t) and rate r(t) = -ln L(t) / size_L.

    Grid points where the echo is exactly zero carry rate = +inf; the
    CSV writer renders those entries as "inf".
    """

    times: np.ndarray
    echo: np.ndarray
    rate: np.ndarray
    size_L: int

    def to_csv(self):
        lines = ["t,echo,rate"]
        for t, e, r in zip(self.times, self.echo, self.rate):
            lines.append(f"{t:.17g},{e:.17g},{r:.17g}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_csv())


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues ascending; eigenvector k in column k of ``states``."""

    energies: np.ndarray
    states: np.ndarray

    @property
    def dim(self):
        return self.energies.shape[0]


def _as_dense(H):
    if isinstance(H, PauliHamiltonian):
        return H.to_dense()
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    return H


def diagonalize(H) -> SpectralDecomposition:
    """Full spectral decomposition of a Hermitian operator.

    Accepts a dense array or a PauliHamiltonian (materialized first).
    Raises on dimensions beyond 2^14 and on non-Hermitian input.
    """
    Hd = _as_dense(H)
    if Hd.shape[0] > DIM_CAP:
        raise ValueError(f"dimension {Hd.shape[0]} exceeds the dense cap {DIM_CAP}")
    herm_defect = np.max(np.abs(Hd - Hd.conj().T)) if Hd.size else 0.0
    if herm_defect > HERMITICITY_TOL:
        raise ValueError(f"input is not Hermitian (max defect {herm_defect:.3e})")
    if np.isrealobj(Hd):
        energies, states = scipy.linalg.eigh(Hd, driver="evd")
        states = states.astype(np.complex128)
    else:
        energies, states = scipy.linalg.eigh(Hd)
    return SpectralDecomposition(energies, states)


def ground_state(H, parity=None):
    """Lowest eigenpair of H.

    Term-list Hamiltonians above dimension 2048 go through Lanczos with
    a deterministic start vector; everything else is dense.  A warning
    is emitted when the ground manifold is degenerate below 1e-10.

    parity="even" additionally projects onto the +1 sector of the
    global spin flip (the symmetric combination), which is the quench
    protocol's initial state for every finite chain.
    """
    if isinstance(H, PauliHamiltonian) and H.dim > 2048:
        op = scipy.sparse.linalg.LinearOperator(
            (H.dim, H.dim), matvec=H.matvec, dtype=np.complex128
        )
        v0 = np.full(H.dim, 1.0 / np.sqrt(H.dim))
        vals, vecs = scipy.sparse.linalg.eigsh(op, k=2, which="SA", v0=v0)
        order = np.argsort(vals)
        energy, psi = vals[order[0]], vecs[:, order[0]]
        gap = vals[order[1]] - vals[order[0]]
    else:
        spec = diagonalize(H)
        energy, psi = spec.energies[0], spec.states[:, 0]
        gap = spec.energies[1] - spec.energies[0] if spec.dim > 1 else np.inf
    if gap < DEGENERACY_GAP:
        warnings.warn(f"ground manifold degenerate (gap {gap:.3e})", stacklevel=2)
    psi = np.asarray(psi, dtype=np.complex128)
    if parity == "even":
        sym = psi + spin_flip(psi)
        norm = np.linalg.norm(sym)
        if norm < 1e-8:
            raise ValueError("lowest eigenvector has odd flip parity; even-sector projection failed")
        psi = sym / norm
    elif parity is not None:
        raise ValueError(f"unsupported parity {parity!r}")
    return float(energy), psi


def evolve(spec: SpectralDecomposition, psi0, t):
    """Propagate psi0 by time t using the spectral resolution of H."""
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.shape != (spec.dim,):
        raise ValueError(f"state dim {psi0.shape} does not match decomposition dim {spec.dim}")
    coeff = spec.states.conj().T @ psi0
    return spec.states @ (np.exp(-1j * spec.energies * t) * coeff)


def _matvec_of(H):
    if isinstance(H, PauliHamiltonian):
        return H.matvec, H.dim
    H = np.asarray(H)
    return (lambda v: H @ v), H.shape[0]


def krylov_evolve(H, psi0, t, subspace_dim=30, step=None, tol=1e-10, max_steps=100000):
    """Lanczos propagator: exp(-iHt) psi0 without diagonalizing H.

    Steps adaptively; a step is accepted when the standard residual
    estimate beta_m * |[exp(-i dt T)]_{m,1}| falls below ``tol``.
    Raises RuntimeError if the step budget runs out.
    """
    if subspace_dim < 2:
        raise ValueError("subspace_dim must be >= 2")
    matvec, dim = _matvec_of(H)
    psi = np.asarray(psi0, dtype=np.complex128).copy()
    if psi.shape != (dim,):
        raise ValueError("state dimension does not match H")
    if t == 0.0:
        return psi
    sign = 1.0 if t > 0 else -1.0
    remaining = abs(t)
    dt = min(remaining, abs(step) if step else remaining)
    steps = 0
    while remaining > 0.0:
        if steps >= max_steps:
            raise RuntimeError(f"krylov_evolve did not converge within {max_steps} steps")
        dt = min(dt, remaining)
        nrm = np.linalg.norm(psi)
        V = np.empty((subspace_dim, dim), dtype=np.complex128)
        alpha = np.zeros(subspace_dim)
        beta = np.zeros(subspace_dim)
        V[0] = psi / nrm
        m = subspace_dim
        breakdown = False
        for j in range(subspace_dim):
            w = matvec(V[j])
            if j > 0:
                w -= beta[j - 1] * V[j - 1]
            alpha[j] = np.vdot(V[j], w).real
            w -= alpha[j] * V[j]
            if j + 1 < subspace_dim:
                beta[j] = np.linalg.norm(w)
                if beta[j] < 1e-14:  # invariant subspace: propagation is exact
                    m = j + 1
                    breakdown = True
                    break
                V[j + 1] = w / beta[j]
        T = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1) + np.diag(beta[: m - 1], -1)
        eT = scipy.linalg.expm(-1j * sign * dt * T)
        if breakdown:
            err = 0.0
        else:
            err = beta[m - 2] * abs(eT[m - 1, 0]) if m >= 2 else np.inf
        if err > tol and dt > 1e-12:
            dt *= 0.5
            steps += 1
            continue
        psi = (V[:m].T @ eT[:, 0]) * nrm
        remaining -= dt
        steps += 1
        if err < 0.01 * tol:
            dt *= 1.5
    return psi


def loschmidt_trace_from_decomposition(spec, psi0, grid, size_L):
    """Echo/rate trace from a precomputed decomposition of the final H."""
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.shape != (spec.dim,):
        raise ValueError("state dimension does not match decomposition")
    weights = np.abs(spec.states.conj().T @ psi0) ** 2
    times = grid.times
    amp = _kernels.survival_amplitudes(weights, spec.energies, times)
    echo = np.abs(amp) ** 2
    with np.errstate(divide="ignore"):
        rate = np.where(echo > 0.0, -np.log(np.maximum(echo, 1e-300)) / size_L, np.inf) + 0.0
    return LoschmidtTrace(times, echo, rate, size_L)


def loschmidt_trace(H_final, psi0, grid, size_L) -> LoschmidtTrace:
    """Loschmidt echo |<psi0|exp(-i H_final t)|psi0>|^2 on a time grid.

    A single diagonalization of H_final is reused for every grid point;
    the per-point cost is O(dim).
    """
    return loschmidt_trace_from_decomposition(diagonalize(H_final), psi0, grid, size_L)
