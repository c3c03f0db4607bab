"""Backend agreement: the jitted kernels must match the numpy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from loschmidt import _kernels


def random_terms(rng, L, n_terms):
    x_masks = np.zeros(n_terms, dtype=np.int64)
    z_masks = np.zeros(n_terms, dtype=np.int64)
    for t in range(n_terms):
        for site in range(L):
            c = rng.choice(["I", "X", "Z"])
            if c == "X":
                x_masks[t] |= 1 << site
            elif c == "Z":
                z_masks[t] |= 1 << site
    return x_masks, z_masks, rng.normal(size=n_terms)


@pytest.mark.parametrize("L,n_terms", [(2, 3), (6, 12), (10, 25)])
def test_matvec_backends_agree(L, n_terms):
    rng = np.random.default_rng(L * 100 + n_terms)
    x_masks, z_masks, coeffs = random_terms(rng, L, n_terms)
    psi = rng.normal(size=1 << L) + 1j * rng.normal(size=1 << L)
    ref = _kernels._pauli_matvec_numpy(psi, x_masks, z_masks, coeffs)
    out = _kernels.pauli_matvec(psi, x_masks, z_masks, coeffs)
    np.testing.assert_allclose(out, ref, atol=1e-12)
    if _kernels.HAS_NUMBA:
        jit = _kernels._pauli_matvec_numba(psi.astype(np.complex128), x_masks, z_masks, coeffs)
        np.testing.assert_allclose(jit, ref, atol=1e-12)


def test_matvec_matches_dense_reference():
    # one explicit 2-site check against hand-built matrices
    rng = np.random.default_rng(0)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    # term X on site 1 (bit 0): flips bit 0
    out = _kernels.pauli_matvec(psi, np.array([1], dtype=np.int64), np.array([0], dtype=np.int64), np.array([1.0]))
    np.testing.assert_allclose(out, psi[[1, 0, 3, 2]], atol=1e-15)
    # term Z on site 2 (bit 1): sign flips upper half
    out = _kernels.pauli_matvec(psi, np.array([0], dtype=np.int64), np.array([2], dtype=np.int64), np.array([1.0]))
    np.testing.assert_allclose(out, psi * np.array([1, 1, -1, -1]), atol=1e-15)


def test_survival_amplitudes_backends_agree():
    rng = np.random.default_rng(3)
    w = rng.random(200)
    w /= w.sum()
    E = rng.normal(size=200)
    t = np.linspace(-4.0, 9.0, 301)
    ref = _kernels._survival_amplitudes_numpy(w, E, t)
    direct = np.array([np.sum(w * np.exp(-1j * E * ti)) for ti in t[::25]])
    np.testing.assert_allclose(ref[::25], direct, atol=1e-13)
    out = _kernels.survival_amplitudes(w, E, t)
    np.testing.assert_allclose(out, ref, atol=1e-12)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, LOSCHMIDT_KERNELS="numpy")
    code = "from loschmidt import _kernels; assert _kernels.USE_NUMBA is False; print('ok')"
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert proc.returncode == 0 and "ok" in proc.stdout


def test_env_flag_rejects_unknown_backend():
    env = dict(os.environ, LOSCHMIDT_KERNELS="cuda")
    proc = subprocess.run(
        [sys.executable, "-c", "import loschmidt._kernels"], env=env, capture_output=True, text=True
    )
    assert proc.returncode != 0
    assert "LOSCHMIDT_KERNELS" in proc.stderr
