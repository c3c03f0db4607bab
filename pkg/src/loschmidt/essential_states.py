"""Minimal few-level models that reproduce Loschmidt-rate structures.

Four model families, in increasing order of dressing: a two-level
(Rabi) system, N equally spaced levels (quantum revivals), a single
Bose-Hubbard site with a coherent-state occupation distribution
(revivals with a quadratic phase progression), and a harmonic tower of
levels weakly coupled to a random thermal background (the scar setup).

All echoes are pure functions of (spec, t) and accept scalar or array
times.  Rate normalization for these models uses one degree of freedom
(size_L = 1).
"""

import math
from dataclasses import dataclass

import numpy as np

from .ed_engine import diagonalize

COHERENT_TAIL_MASS = 1e-14


@dataclass(frozen=True)
class TwoLevelSpec:
    """Two levels split by ``splitting``; initial upper-level weight."""

    splitting: float
    weight: float = 0.5

    def __post_init__(self):
        if self.splitting <= 0:
            raise ValueError("splitting must be positive")
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("weight must lie in [0, 1]")


def two_level_echo(spec: TwoLevelSpec, t):
    """Survival probability 1 - 4w(1-w) sin^2(splitting*t/2)."""
    w = spec.weight
    return 1.0 - 4.0 * w * (1.0 - w) * np.sin(0.5 * spec.splitting * np.asarray(t)) ** 2


@dataclass(frozen=True)
class LadderSpec:
    """Equally spaced levels E_n = n*spacing populated with amplitudes c_n."""

    amplitudes: np.ndarray
    spacing: float

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.shape[0] < 1:
            raise ValueError("amplitudes must be a 1d array")
        norm = np.sum(np.abs(amps) ** 2)
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"amplitudes must be normalized (got sum |c|^2 = {norm})")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def populations(self):
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()


def uniform_ladder(n_levels, spacing):
    """Ladder populated uniformly over n_levels."""
    return LadderSpec(np.full(n_levels, 1.0 / math.sqrt(n_levels)), spacing)


def ladder_echo(spec: LadderSpec, t):
    """|sum_n |c_n|^2 exp(-i n spacing t)|^2; periodic with 2 pi / spacing."""
    p = spec.populations
    n = np.arange(p.shape[0])
    t = np.asarray(t)
    amp = np.exp(-1j * spec.spacing * np.multiply.outer(t, n)) @ p
    return np.abs(amp) ** 2


@dataclass(frozen=True)
class BoseSiteSpec:
    """Single Bose-Hubbard site after the lattice has been ramped up.

    The initial occupation distribution is coherent-like with mean
    ``mean_occupation``; evolution under U n(n-1)/2 returns to itself
    at t = 2 pi / interaction.  ``truncation`` defaults to the smallest
    cutoff whose Poisson tail mass is below 1e-14.
    """

    mean_occupation: float = 2.0
    interaction: float = 1.0
    truncation: int | None = None

    def __post_init__(self):
        if self.mean_occupation <= 0:
            raise ValueError("mean_occupation must be positive")
        if self.interaction <= 0:
            raise ValueError("interaction must be positive")
        if self.truncation is None:
            object.__setattr__(self, "truncation", _poisson_cutoff(self.mean_occupation))
        elif self.truncation < 1:
            raise ValueError("truncation must be >= 1")


def _poisson_cutoff(nbar, tail=COHERENT_TAIL_MASS, hard_cap=2000):
    p = math.exp(-nbar)
    cum = p
    n = 0
    while 1.0 - cum > tail and n < hard_cap:
        n += 1
        p *= nbar / n
        cum += p
    return n


def bose_site_populations(spec: BoseSiteSpec):
    """Truncated, renormalized coherent-state occupation probabilities."""
    n = np.arange(spec.truncation + 1)
    log_fact = np.array([math.lgamma(m + 1.0) for m in n])
    p = np.exp(-spec.mean_occupation + n * math.log(spec.mean_occupation) - log_fact)
    return p / p.sum()


def bose_site_echo(spec: BoseSiteSpec, t):
    """|sum_n p_n exp(-i U n(n-1) t / 2)|^2, exactly periodic with 2 pi / U."""
    p = bose_site_populations(spec)
    n = np.arange(p.shape[0])
    phases = 0.5 * spec.interaction * n * (n - 1)
    amp = np.exp(-1j * np.multiply.outer(np.asarray(t), phases)) @ p
    return np.abs(amp) ** 2


@dataclass(frozen=True)
class ScarSpec:
    """Equally spaced tower embedded in a random thermal background.

    tower_size levels at ``spacing`` sit block-diagonally next to a
    GOE background of ``background_size`` levels scaled to full
    bandwidth ``background_bandwidth`` and centered on the tower.
    ``coupling`` is the root-sum-square coupling of one tower level to
    the whole background (matrix elements are i.i.d. normal with
    standard deviation coupling/sqrt(background_size)).  Deterministic
    in ``seed``.
    """

    tower_size: int
    spacing: float = 1.0
    background_size: int = 512
    background_bandwidth: float = 8.0
    coupling: float = 0.05
    seed: int = 7

    def __post_init__(self):
        if self.tower_size < 2:
            raise ValueError("tower_size must be >= 2")
        if self.background_size < 0:
            raise ValueError("background_size must be >= 0")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.coupling < 0:
            raise ValueError("coupling must be >= 0")

    @property
    def dim(self):
        return self.tower_size + self.background_size

    @property
    def tower_energies(self):
        return np.arange(self.tower_size) * self.spacing


def build_scar_hamiltonian(spec: ScarSpec):
    """Dense symmetric scar-model Hamiltonian, deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    n_t, m = spec.tower_size, spec.background_size
    H = np.zeros((spec.dim, spec.dim))
    H[:n_t, :n_t] = np.diag(spec.tower_energies)
    if m == 0:
        return H
    A = rng.normal(size=(m, m))
    goe = (A + A.T) / np.sqrt(2.0)  # off-diagonal variance 1
    H[n_t:, n_t:] = (spec.background_bandwidth / (4.0 * np.sqrt(m))) * goe
    H[n_t:, n_t:] += np.eye(m) * (0.5 * (n_t - 1) * spec.spacing)
    C = rng.normal(scale=spec.coupling / np.sqrt(m), size=(n_t, m))
    H[:n_t, n_t:] = C
    H[n_t:, :n_t] = C.T
    return H


def tower_state(spec: ScarSpec):
    """Uniform superposition over the tower levels."""
    psi = np.zeros(spec.dim, dtype=np.complex128)
    psi[: spec.tower_size] = 1.0 / math.sqrt(spec.tower_size)
    return psi


def scar_overlap_profile(H, psi0):
    """Spectral overlaps of psi0: arrays (energies, weights), energy-sorted."""
    spec = diagonalize(H)
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.shape != (spec.dim,):
        raise ValueError("state dimension does not match H")
    weights = np.abs(spec.states.conj().T @ psi0) ** 2
    return spec.energies, weights


def near_tower_weight(energies, weights, tower_energies, window):
    """Total spectral weight within ``window`` of any tower energy."""
    dist = np.min(np.abs(energies[:, None] - np.asarray(tower_energies)[None, :]), axis=1)
    return float(weights[dist <= window].sum())
