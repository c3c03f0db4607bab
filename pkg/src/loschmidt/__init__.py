"""Loschmidt echoes and rate functions for sudden quantum quenches.

Subpackages by role:

- ``spin_hamiltonian``: transverse-field Ising chain, product states,
  Pauli term lists with a bitwise matvec.
- ``ed_engine``: full diagonalization, spectral and Lanczos propagation,
  echo traces (the brute-force reference for everything else).
- ``free_fermion``: momentum-mode solution of the chain quench, the
  thermodynamic-limit rate, and critical times.
- ``essential_states``: minimal few-level models (two-level, ladder,
  single Bose site, scar tower) reproducing the same rate structures.
- ``rate_analysis``: rates from echoes, cusp detection, size scans.
- ``cli``: the ``loschmidt`` command.
"""

from ._version import __version__
from .ed_engine import (
    LoschmidtTrace,
    SpectralDecomposition,
    TimeGrid,
    diagonalize,
    evolve,
    ground_state,
    krylov_evolve,
    loschmidt_trace,
)
from .essential_states import (
    BoseSiteSpec,
    LadderSpec,
    ScarSpec,
    TwoLevelSpec,
    bose_site_echo,
    build_scar_hamiltonian,
    ladder_echo,
    scar_overlap_profile,
    tower_state,
    two_level_echo,
    uniform_ladder,
)
from .free_fermion import (
    CriticalTimes,
    FermionModeSet,
    ThermoRateTrace,
    build_modes,
    critical_times,
    finite_trace,
    mode_echo,
    thermo_rate,
)
from .rate_analysis import (
    CuspReport,
    QuenchSpec,
    ScalingScan,
    detect_cusps,
    rate_from_echo,
    scaling_scan,
)
from .spin_hamiltonian import (
    ChainSpec,
    PauliHamiltonian,
    build_tfim,
    product_state_x,
    product_state_z,
    spin_flip,
)

__all__ = [
    "__version__",
    "BoseSiteSpec",
    "ChainSpec",
    "CriticalTimes",
    "CuspReport",
    "FermionModeSet",
    "LadderSpec",
    "LoschmidtTrace",
    "PauliHamiltonian",
    "QuenchSpec",
    "ScalingScan",
    "ScarSpec",
    "SpectralDecomposition",
    "ThermoRateTrace",
    "TimeGrid",
    "TwoLevelSpec",
    "bose_site_echo",
    "build_modes",
    "build_scar_hamiltonian",
    "build_tfim",
    "critical_times",
    "detect_cusps",
    "diagonalize",
    "evolve",
    "finite_trace",
    "ground_state",
    "krylov_evolve",
    "ladder_echo",
    "loschmidt_trace",
    "mode_echo",
    "product_state_x",
    "product_state_z",
    "rate_from_echo",
    "scaling_scan",
    "scar_overlap_profile",
    "spin_flip",
    "thermo_rate",
    "tower_state",
    "two_level_echo",
    "uniform_ladder",
]
