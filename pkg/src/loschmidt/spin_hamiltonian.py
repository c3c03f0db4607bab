"""Transverse-field Ising chain and its product initial states.

The chain Hamiltonian is

    H = -(J/2) sum_i sigma^z_i sigma^z_{i+1} - (g/2) sum_i sigma^x_i

with J = ``coupling`` (1 for the standard chain, 0 for the field-only
chain used in decoupled-site quenches).  Periodic chains sum the bond
term over i = 1..L with site L+1 = site 1; for L = 2 this counts the
single geometric bond twice, which we keep as the literal sum.

Basis convention (fixed for file-format reproducibility): computational
sigma^z basis, site i occupies bit i-1 of the basis index, bit value 0
is the sigma^z = +1 state.  Pauli strings are written over {I, X, Z}
with string position i-1 holding site i.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

DENSE_CAP = 14  # largest L materialized as a dense 2^L x 2^L matrix

_PAULI_ALPHABET = frozenset("IXZ")


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of one transverse-field Ising chain."""

    L: int
    g: float
    boundary: str = "periodic"
    coupling: float = 1.0

    def __post_init__(self):
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"boundary must be 'periodic' or 'open', got {self.boundary!r}")
        min_L = 2 if self.boundary == "periodic" else 1
        if self.L < min_L:
            raise ValueError(f"L={self.L} too small for {self.boundary} boundary (need >= {min_L})")
        if not math.isfinite(self.g):
            raise ValueError("g must be finite")
        if not math.isfinite(self.coupling):
            raise ValueError("coupling must be finite")


@dataclass(frozen=True)
class PauliHamiltonian:
    """Hermitian operator stored as a list of real-weighted {I,X,Z} strings.

    The term list is exact (Hermitian by construction); dense
    materialization is only allowed up to ``DENSE_CAP`` sites.  Matvec
    goes through the bitwise kernels and never builds the matrix.
    """

    L: int
    paulis: tuple
    coeffs: np.ndarray
    x_masks: np.ndarray = field(init=False, repr=False)
    z_masks: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if len(self.paulis) != coeffs.shape[0]:
            raise ValueError("paulis and coeffs length mismatch")
        x_masks = np.zeros(len(self.paulis), dtype=np.int64)
        z_masks = np.zeros(len(self.paulis), dtype=np.int64)
        for t, p in enumerate(self.paulis):
            if len(p) != self.L or not _PAULI_ALPHABET.issuperset(p):
                raise ValueError(f"bad Pauli string {p!r} for L={self.L}")
            for site, ch in enumerate(p):
                if ch == "X":
                    x_masks[t] |= 1 << site
                elif ch == "Z":
                    z_masks[t] |= 1 << site
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "x_masks", x_masks)
        object.__setattr__(self, "z_masks", z_masks)

    @property
    def dim(self):
        return 1 << self.L

    def matvec(self, psi):
        psi = np.asarray(psi)
        if psi.shape != (self.dim,):
            raise ValueError(f"state has shape {psi.shape}, expected ({self.dim},)")
        return _kernels.pauli_matvec(psi, self.x_masks, self.z_masks, self.coeffs)

    def to_dense(self, cap=DENSE_CAP):
        """Materialize as a real symmetric matrix (allowed up to L = cap)."""
        if self.L > cap:
            raise ValueError(f"L={self.L} exceeds dense cap {cap} (dimension {self.dim})")
        dim = self.dim
        idx = np.arange(dim, dtype=np.int64)
        H = np.zeros((dim, dim))
        for mx, mz, c in zip(self.x_masks, self.z_masks, self.coeffs):
            signs = 1.0 - 2.0 * (np.bitwise_count(idx & mz) & 1)
            H[idx ^ mx, idx] += c * signs
        return H

    def term_list(self):
        return [{"pauli": p, "coeff": float(c)} for p, c in zip(self.paulis, self.coeffs)]

    def to_term_json(self):
        """Deterministic JSON export of the term list (build order preserved)."""
        return json.dumps(self.term_list())


def build_tfim(spec: ChainSpec) -> PauliHamiltonian:
    """Build the chain Hamiltonian for ``spec`` as a Pauli term list.

    Term order is deterministic: bond terms in ascending site order,
    then field terms in ascending site order.  Terms with an exactly
    zero coefficient are dropped.
    """
    paulis = []
    coeffs = []
    if spec.coupling != 0.0:
        if spec.boundary == "periodic":
            bonds = [(i, (i + 1) % spec.L) for i in range(spec.L)]
        else:
            bonds = [(i, i + 1) for i in range(spec.L - 1)]
        for i, j in bonds:
            chars = ["I"] * spec.L
            chars[i] = "Z"
            chars[j] = "Z"
            paulis.append("".join(chars))
            coeffs.append(-spec.coupling / 2.0)
    if spec.g != 0.0:
        for i in range(spec.L):
            chars = ["I"] * spec.L
            chars[i] = "X"
            paulis.append("".join(chars))
            coeffs.append(-spec.g / 2.0)
    return PauliHamiltonian(spec.L, tuple(paulis), np.array(coeffs))


def product_state_z(L, sign):
    """All-sites sigma^z product state: |+>^z...|+>^z for sign=+1."""
    if L < 1:
        raise ValueError("L must be >= 1")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    psi = np.zeros(1 << L, dtype=np.complex128)
    psi[0 if sign == 1 else (1 << L) - 1] = 1.0
    return psi

def product_state_x(L, sign):
    """All-sites sigma^x product state, each site (|+>^z + sign|->^z)/sqrt(2)."""
    if L < 1:
        raise ValueError("L must be >= 1")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    idx = np.arange(1 << L, dtype=np.int64)
    amps = np.where(np.bitwise_count(idx) % 2 == 0, 1.0, float(sign))
    return amps.astype(np.complex128) * 2.0 ** (-L / 2.0)


def spin_flip(psi):
    """Apply the global flip Prod_i sigma^x_i (complements every bit)."""
    dim = psi.shape[0]
    if dim & (dim - 1):
        raise ValueError("state dimension is not a power of two")
    return psi[(dim - 1) ^ np.arange(dim)]
