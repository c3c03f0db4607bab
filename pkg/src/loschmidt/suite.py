"""Built-in verification suite: re-derives every headline claim.

Each check pins its tolerance in place.  The CLI's ``paper-suite``
subcommand runs all of them and prints one pass/fail line per check;
the acceptance test module drives the same functions.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import ed_engine, essential_states, free_fermion, rate_analysis
from .ed_engine import TimeGrid
from .spin_hamiltonian import ChainSpec, build_tfim, product_state_z


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    runtime_s: float


def _result(name, t0, passed, detail):
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


def ed_quench_trace(L, g0, gf, grid, coupling=1.0, initial="ground"):
    """Reference quench protocol: evolve under H(gf) from the chosen state."""
    h_final = build_tfim(ChainSpec(L, gf, coupling=coupling))
    if initial == "ground":
        _, psi0 = ed_engine.ground_state(build_tfim(ChainSpec(L, g0, coupling=coupling)), parity="even")
    elif initial == "z+":
        psi0 = product_state_z(L, +1)
    else:
        raise ValueError(f"unknown initial state {initial!r}")
    return ed_engine.loschmidt_trace(h_final, psi0, grid, L)


def check_product_formula_cusps():
    """Analytic per-site echo, g=2: cusps at (2k+1) pi/2 within one step."""
    t0 = time.perf_counter()
    g = 2.0
    grid = TimeGrid(0.0, 8.0, 1601)  # dt = 0.005
    times = grid.times
    echo = np.cos(0.5 * g * times) ** 2
    trace = rate_analysis.rate_from_echo(ed_engine.LoschmidtTrace(times, echo, np.zeros_like(times), 1))
    report = rate_analysis.detect_cusps(trace)
    expected = (2 * np.arange(3) + 1) * np.pi / g
    cusps = report.cusps_only()
    ok = cusps.shape[0] == 3 and np.all(
        np.abs(cusps - expected) <= grid.dt + 1e-12
    )
    return _result(
        "1 product-formula cusps",
        t0,
        ok,
        f"cusps at {np.round(cusps, 4)} vs (2k+1)pi/2 = {np.round(expected, 4)}",
    )


def check_oracle_equivalence():
    """Spectral and momentum-mode echoes agree to 1e-8 on nine quenches."""
    t0 = time.perf_counter()
    grid = TimeGrid(0.0, 10.0, 2001)
    worst = 0.0
    for L in (8, 10, 12):
        for g0, gf in ((0.1, 4.0), (0.5, 2.0), (2.0, 0.5)):
            ed = ed_quench_trace(L, g0, gf, grid)
            ff = free_fermion.finite_trace(free_fermion.build_modes(g0, gf, L), grid)
            worst = max(worst, float(np.max(np.abs(ed.echo - ff.echo))))
    return _result("2 oracle equivalence", t0, worst < 1e-8, f"max |ED - FF| echo = {worst:.3e}")


def check_deep_quench_limit():
    """Field-only quench from the polarized state: echo = cos^{2L}(gt/2)."""
    t0 = time.perf_counter()
    L, g = 10, 3.0
    grid = TimeGrid(0.0, 10.0, 2001)
    closed_form = np.cos(0.5 * g * grid.times) ** (2 * L)
    ed = ed_quench_trace(L, 0.0, g, grid, coupling=0.0, initial="z+")
    ff = free_fermion.finite_trace(free_fermion.build_modes(0.0, g, L, coupling=0.0), grid)
    dev_ed = float(np.max(np.abs(ed.echo - closed_form)))
    dev_ff = float(np.max(np.abs(ff.echo - closed_form)))
    ok = dev_ed < 1e-10 and dev_ff < 1e-10
    return _result("3 deep-quench limit", t0, ok, f"|ED-analytic| {dev_ed:.3e}, |FF-analytic| {dev_ff:.3e}")


def check_thermo_cusps():
    """Quadrature-rate cusps appear iff the tested quench crosses g=1."""
    t0 = time.perf_counter()
    grid = TimeGrid(0.0, 5.0, 10001)  # dt = 5e-4 < 1e-3 matching tolerance
    crossing = free_fermion.thermo_rate(0.5, 2.0, grid)
    trace = ed_engine.LoschmidtTrace(crossing.times, np.exp(-crossing.rate), crossing.rate, 1)
    report = rate_analysis.detect_cusps(trace)
    cusps = report.cusps_only()
    t_star = free_fermion.critical_times(0.5, 2.0, cusps.shape[0]).times
    ok_cross = cusps.shape[0] >= 2 and np.all(np.abs(cusps - t_star[: cusps.shape[0]]) <= 1e-3)

    within = free_fermion.thermo_rate(0.2, 0.4, grid)
    trace_w = ed_engine.LoschmidtTrace(within.times, np.exp(-within.rate), within.rate, 1)
    n_within = rate_analysis.detect_cusps(trace_w).cusps_only().shape[0]

    scan = rate_analysis.scaling_scan(
        rate_analysis.QuenchSpec(0.2, 0.4, 8, TimeGrid(0.0, 6.0, 12001)), (8, 10, 12, 14)
    )
    spread = float(np.nanmax(scan.peak_sharpness) / np.nanmin(scan.peak_sharpness))
    ok = ok_cross and n_within == 0 and spread < 2.0
    return _result(
        "4 thermodynamic cusps iff crossing",
        t0,
        ok,
        f"crossing cusps {np.round(cusps, 4)} vs t* {np.round(t_star[:cusps.shape[0]], 4)}; "
        f"within-phase cusps {n_within}, sharpness spread {spread:.3f}x",
    )


def check_bose_revivals():
    """Single-site revivals at 2 pi m / U, rate maxima near (2m+1) pi."""
    t0 = time.perf_counter()
    spec = essential_states.BoseSiteSpec(mean_occupation=2.0, interaction=1.0)
    revival_dev = max(
        abs(float(essential_states.bose_site_echo(spec, 2.0 * np.pi * m)) - 1.0) for m in (1, 2, 3)
    )
    times = np.linspace(0.0, 8.0 * np.pi, 20001)
    rate = -np.log(np.maximum(essential_states.bose_site_echo(spec, times), 1e-300))
    devs = []
    for m in (1, 2, 3):
        lo, hi = 2.0 * np.pi * m, 2.0 * np.pi * (m + 1)
        window = (times > lo) & (times < hi)
        t_peak = times[window][np.argmax(rate[window])]
        mid = (2 * m + 1) * np.pi
        devs.append(abs(t_peak - mid) / mid)
    ok = revival_dev < 1e-10 and max(devs) < 0.05
    return _result(
        "5 Bose-Hubbard revivals",
        t0,
        ok,
        f"|echo(2 pi m)-1| <= {revival_dev:.2e}; rate-max offsets {[f'{d:.1%}' for d in devs]}",
    )


def check_scar_tower():
    """Tower revivals survive weak coupling to a thermal background."""
    t0 = time.perf_counter()
    omega = 1.0
    decoupled = essential_states.ScarSpec(8, omega, 512, 8.0 * omega, 0.0, seed=7)
    h0 = essential_states.build_scar_hamiltonian(decoupled)
    psi0 = essential_states.tower_state(decoupled)
    period = 2.0 * np.pi / omega
    grid = TimeGrid(0.0, 3.5 * period, 3501)
    exact = ed_engine.loschmidt_trace(h0, psi0, grid, 1)
    idx_rev = [np.argmin(np.abs(grid.times - m * period)) for m in (1, 2, 3)]
    dev0 = max(abs(exact.echo[i] - 1.0) for i in idx_rev)

    coupled = essential_states.ScarSpec(8, omega, 512, 8.0 * omega, 0.05 * omega, seed=7)
    h = essential_states.build_scar_hamiltonian(coupled)
    trace = ed_engine.loschmidt_trace(h, psi0, grid, 1)
    peaks = []
    for m in (1, 2, 3):
        window = np.abs(grid.times - m * period) < 0.25 * period
        peaks.append(float(np.max(trace.echo[window])))
    energies, weights = essential_states.scar_overlap_profile(h, psi0)
    tower_weight = essential_states.near_tower_weight(
        energies, weights, coupled.tower_energies, 0.25 * omega
    )
    ok = dev0 < 1e-12 and min(peaks) > 0.25 and peaks[0] > 0.5 and tower_weight > 0.9
    return _result(
        "6 scar tower revivals",
        t0,
        ok,
        f"decoupled revival defect {dev0:.2e}; peaks {np.round(peaks, 3)}; "
        f"near-tower weight {tower_weight:.4f}",
    )


def check_property_suite():
    """Unitarity, evenness, Hermiticity, propagator agreement, reductions."""
    t0 = time.perf_counter()
    failures = []

    L, g0, gf = 8, 0.5, 2.0
    h0 = build_tfim(ChainSpec(L, g0))
    hf = build_tfim(ChainSpec(L, gf))
    _, psi0 = ed_engine.ground_state(h0, parity="even")
    spec = ed_engine.diagonalize(hf)
    grid = TimeGrid(-5.0, 5.0, 1001)
    norms = np.array([np.linalg.norm(ed_engine.evolve(spec, psi0, t)) for t in grid.times[::50]])
    if np.max(np.abs(norms - 1.0)) >= 1e-12:
        failures.append("unitarity")

    trace = ed_engine.loschmidt_trace(hf, psi0, grid, L)
    if np.max(np.abs(trace.echo - trace.echo[::-1])) >= 1e-12:
        failures.append("echo evenness")

    dense = hf.to_dense()
    if np.max(np.abs(dense - dense.T)) >= 1e-12:
        failures.append("hermiticity")

    psi_k = ed_engine.krylov_evolve(hf, psi0, 3.7)
    psi_s = ed_engine.evolve(spec, psi0, 3.7)
    if np.max(np.abs(psi_k - psi_s)) > 1e-9:
        failures.append("krylov vs spectral")

    two = essential_states.TwoLevelSpec(splitting=3.0)
    ladder = essential_states.LadderSpec(
        np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0), 1.0
    )
    ts = np.linspace(0.0, 7.0, 400)
    if np.max(np.abs(essential_states.ladder_echo(ladder, ts) - essential_states.two_level_echo(two, ts))) >= 1e-12:
        failures.append("ladder reduction")

    site = essential_states.BoseSiteSpec(2.0, 1.0)
    doubled = essential_states.BoseSiteSpec(2.0, 1.0, truncation=2 * site.truncation)
    if np.max(np.abs(essential_states.bose_site_echo(site, ts) - essential_states.bose_site_echo(doubled, ts))) >= 1e-12:
        failures.append("truncation stability")

    return _result(
        "7 property suite",
        t0,
        not failures,
        "all properties hold" if not failures else "failed: " + ", ".join(failures),
    )


ALL_CHECKS = (
    check_product_formula_cusps,
    check_oracle_equivalence,
    check_deep_quench_limit,
    check_thermo_cusps,
    check_bose_revivals,
    check_scar_tower,
    check_property_suite,
)


def run_paper_suite(checks=ALL_CHECKS):
    return [check() for check in checks]


def format_table(results):
    lines = []
    for r in results:
        lines.append(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<36} {r.runtime_s:7.2f}s  {r.detail}")
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return "\n".join(lines)
