"""Momentum-mode quench solution against the brute-force engine."""

import json

import numpy as np
import pytest
from scipy.integrate import simpson

from loschmidt import (
    ChainSpec,
    TimeGrid,
    build_modes,
    build_tfim,
    critical_times,
    finite_trace,
    ground_state,
    loschmidt_trace,
    mode_echo,
    product_state_z,
    thermo_rate,
)
from loschmidt.free_fermion import find_critical_momentum


def ed_echo(L, g0, gf, grid):
    _, psi0 = ground_state(build_tfim(ChainSpec(L, g0)), parity="even")
    return loschmidt_trace(build_tfim(ChainSpec(L, gf)), psi0, grid, L).echo


def thermo_rate_simpson(g0, gf, t, n=400001):
    """Independent quadrature oracle: very fine composite Simpson rule."""
    k = np.linspace(1e-10, np.pi - 1e-10, n)
    theta2 = lambda g: np.arctan2(np.sin(k), g - np.cos(k))
    s2 = np.sin(theta2(gf) - theta2(g0)) ** 2
    eps = np.sqrt(1 + gf * gf - 2 * gf * np.cos(k))
    return -simpson(np.log(1 - s2 * np.sin(eps * t) ** 2), x=k) / (2 * np.pi)


class TestBuildModes:
    def test_no_quench_means_no_mixing(self):
        modes = build_modes(1.3, 1.3, 10)
        np.testing.assert_allclose(modes.delta_theta, 0.0, atol=1e-15)

    def test_momentum_grid(self):
        modes = build_modes(0.5, 2.0, 8)
        assert modes.momenta.shape == (4,)
        assert np.all(np.diff(modes.momenta) > 0)
        assert 0 < modes.momenta[0] and modes.momenta[-1] < np.pi
        np.testing.assert_allclose(modes.momenta, (2 * np.arange(1, 5) - 1) * np.pi / 8)

    def test_swap_symmetry(self):
        up = build_modes(0.3, 2.5, 12)
        down = build_modes(2.5, 0.3, 12)
        np.testing.assert_allclose(np.abs(up.delta_theta), np.abs(down.delta_theta), atol=1e-15)

    def test_dispersions_positive_off_criticality(self):
        for g in (0.4, 2.2):
            modes = build_modes(g, g, 10)
            assert np.all(modes.eps_final > 0)

    def test_ground_energy_identity(self):
        # an independent consequence of the dispersion convention:
        # the chain ground energy is -sum_k eps_k over the mode set
        for L, g in ((8, 0.5), (8, 1.0), (10, 1.5)):
            modes = build_modes(g, g, L)
            e0 = np.linalg.eigvalsh(build_tfim(ChainSpec(L, g)).to_dense())[0]
            assert abs(e0 + modes.eps_final.sum()) < 1e-12

    def test_odd_L_rejected(self):
        with pytest.raises(ValueError):
            build_modes(0.5, 2.0, 7)

    def test_negative_field_rejected(self):
        with pytest.raises(ValueError):
            build_modes(-0.1, 1.0, 8)


class TestModeEcho:
    def test_unquenched_mode_stays_put(self):
        modes = build_modes(0.7, 0.7, 8)
        t = np.linspace(0.0, 20.0, 50)
        np.testing.assert_allclose(mode_echo(modes, 2, t), 1.0)

    def test_t0(self):
        modes = build_modes(0.1, 4.0, 8)
        for i in range(4):
            assert mode_echo(modes, i, 0.0) == 1.0

    def test_bad_index(self):
        with pytest.raises(IndexError):
            mode_echo(build_modes(0.1, 4.0, 8), 4, 1.0)

    def test_product_matches_ed(self):
        grid = TimeGrid(0.0, 10.0, 401)
        modes = build_modes(0.1, 4.0, 8)
        product = np.prod([mode_echo(modes, i, grid.times) for i in range(4)], axis=0)
        np.testing.assert_allclose(product, ed_echo(8, 0.1, 4.0, grid), atol=1e-8)


class TestFiniteTrace:
    @pytest.mark.parametrize("g0,gf", [(0.1, 4.0), (0.5, 2.0), (2.0, 0.5), (0.2, 0.4)])
    def test_matches_ed_at_L8(self, g0, gf):
        grid = TimeGrid(0.0, 10.0, 501)
        trace = finite_trace(build_modes(g0, gf, 8), grid)
        np.testing.assert_allclose(trace.echo, ed_echo(8, g0, gf, grid), atol=1e-8)

    def test_deep_quench_closed_form(self):
        L, g = 6, 2.5
        grid = TimeGrid(0.0, 8.0, 801)
        trace = finite_trace(build_modes(0.0, g, L, coupling=0.0), grid)
        np.testing.assert_allclose(trace.echo, np.cos(0.5 * g * grid.times) ** (2 * L), atol=1e-10)
        ed = loschmidt_trace(
            build_tfim(ChainSpec(L, g, coupling=0.0)), product_state_z(L, +1), grid, L
        )
        np.testing.assert_allclose(trace.echo, ed.echo, atol=1e-10)

    def test_rate_normalization(self):
        grid = TimeGrid(0.0, 4.0, 101)
        trace = finite_trace(build_modes(0.5, 2.0, 10), grid)
        finite = np.isfinite(trace.rate)
        np.testing.assert_allclose(
            trace.rate[finite], -np.log(trace.echo[finite]) / 10.0, atol=1e-14
        )
        assert trace.size_L == 10


class TestThermoRate:
    def test_no_quench_rate_vanishes(self):
        grid = TimeGrid(0.0, 5.0, 51)
        out = thermo_rate(1.2, 1.2, grid)
        np.testing.assert_allclose(out.rate, 0.0, atol=1e-14)

    def test_rate_zero_at_t0_and_nonnegative(self):
        grid = TimeGrid(0.0, 6.0, 301)
        out = thermo_rate(0.5, 2.0, grid)
        assert abs(out.rate[0]) < 1e-12
        assert np.all(out.rate >= -1e-12)

    def test_matches_simpson_oracle(self):
        grid = TimeGrid(0.5, 2.5, 5)
        out = thermo_rate(0.5, 2.0, grid)
        for t, r in zip(out.times, out.rate):
            assert abs(r - thermo_rate_simpson(0.5, 2.0, t)) < 1e-7

    def test_within_phase_matches_oracle(self):
        grid = TimeGrid(1.0, 9.0, 5)
        out = thermo_rate(0.2, 0.4, grid)
        for t, r in zip(out.times, out.rate):
            assert abs(r - thermo_rate_simpson(0.2, 0.4, t)) < 1e-8

    def test_doubling_nodes_stays_within_error_estimate(self):
        grid = TimeGrid(0.0, 4.0, 41)
        coarse = thermo_rate(0.5, 2.0, grid, nodes=128)
        fine = thermo_rate(0.5, 2.0, grid, nodes=256)
        assert np.max(np.abs(fine.rate - coarse.rate)) <= max(coarse.max_error, 1e-12)
        assert fine.max_error <= coarse.max_error

    def test_node_floor_enforced(self):
        with pytest.raises(ValueError):
            thermo_rate(0.5, 2.0, TimeGrid(0.0, 1.0, 5), nodes=32)

    def test_reports_node_count(self):
        out = thermo_rate(0.5, 2.0, TimeGrid(0.0, 1.0, 5), nodes=64)
        assert out.quadrature_nodes >= 64


class TestCriticalTimes:
    def test_no_quench_is_empty(self):
        out = critical_times(0.7, 0.7, 5)
        assert not out.has_critical_mode and out.times.shape == (0,)

    def test_within_phase_has_no_critical_mode(self):
        for g0, gf in ((0.2, 0.4), (1.5, 3.0)):
            out = critical_times(g0, gf, 5)
            assert not out.has_critical_mode

    def test_critical_momentum_closed_form(self):
        for g0, gf in ((0.5, 2.0), (0.1, 4.0), (2.0, 0.5)):
            k = find_critical_momentum(g0, gf)
            assert abs(np.cos(k) - (1 + g0 * gf) / (g0 + gf)) < 1e-12

    def test_times_are_zeros_of_the_critical_mode(self):
        g0, gf = 0.5, 2.0
        out = critical_times(g0, gf, 4)
        # oracle: dense scan of the critical-mode echo for its minima
        eps = np.sqrt(1 + gf * gf - 2 * gf * np.cos(out.k_star))
        t = np.linspace(1e-4, 10.0, 2000001)
        lk = 1.0 - np.sin(eps * t) ** 2  # equal populations at k*
        minima = t[1:-1][(lk[1:-1] < lk[:-2]) & (lk[1:-1] < lk[2:])]
        np.testing.assert_allclose(out.times, minima[:4], atol=1e-5)
        assert np.max(np.abs(lk[np.searchsorted(t, out.times)])) < 1e-10

    def test_deep_quench_site_route_gives_odd_pi_over_g(self):
        gf = 50.0
        out = critical_times(0.0, gf, 3, coupling=0.0)
        np.testing.assert_allclose(out.times, (2 * np.arange(3) + 1) * np.pi / gf, rtol=1e-12)

    def test_interacting_deep_quench_uses_quasiparticle_zeros(self):
        # the momentum-mode route pins t* to the echo zeros, which sit at
        # (2n+1) pi / (2 eps_k*); at g0=0, gf=50 that is half the
        # decoupled-site value
        out = critical_times(0.0, 50.0, 2)
        eps_star = np.sqrt(1 + 50.0**2 - 2 * 50.0 * np.cos(out.k_star))
        np.testing.assert_allclose(out.times, (2 * np.arange(2) + 1) * np.pi / (2 * eps_star))
        assert abs(out.times[0] - np.pi / 100.0) / (np.pi / 100.0) < 0.01

    def test_json_export(self):
        out = critical_times(0.5, 2.0, 2)
        payload = json.loads(out.to_json())
        assert set(payload) == {"g0", "gf", "k_star", "t_star"}
        assert len(payload["t_star"]) == 2
