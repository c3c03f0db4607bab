"""Command-line entry point: reproducible quench experiments.

Every run writes its data files plus a ``manifest.json`` into a fresh
``<output-dir>/<subcommand>-<timestamp>/`` directory.  Data files are
byte-reproducible for identical configuration and seed; the manifest
additionally records wall time and light self-checks.

Exit codes: 0 success, 1 runtime failure (message names the module),
2 usage error (message names the violated precondition).
"""

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from . import _kernels, ed_engine, essential_states, free_fermion, rate_analysis, suite
from ._version import __version__
from .ed_engine import TimeGrid
from .spin_hamiltonian import DENSE_CAP, ChainSpec, build_tfim, product_state_z


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    subcommand: str
    params: dict
    grid: TimeGrid | None
    output_dir: str
    seed: int
    format: str
    threads: int | None


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    version: str
    wall_time_s: float
    files: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default="runs", help="directory for run folders")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="trace file format")
    common.add_argument("--seed", type=int, default=7, help="seed for stochastic models")
    common.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads for the jitted kernels (default: LOSCHMIDT_THREADS or all cores)",
    )
    parser = argparse.ArgumentParser(
        prog="loschmidt",
        description="Quench dynamics: Loschmidt echoes, rate functions, cusp analysis.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_sub(name, help_text):
        return sub.add_parser(name, help=help_text, parents=[common])

    def add_grid(p, t_max=10.0, points=2001):
        p.add_argument("--t-min", type=float, default=0.0)
        p.add_argument("--t-max", type=float, default=t_max)
        p.add_argument("--points", type=int, default=points)

    p = add_sub("tfim-ed", "chain quench via full diagonalization")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--g0", type=float, required=True)
    p.add_argument("--gf", type=float, required=True)
    p.add_argument("--boundary", choices=("periodic", "open"), default="periodic")
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--initial", choices=("ground", "z+", "z-"), default="ground")
    p.add_argument("--krylov", action="store_true", help="Lanczos propagation past the dense cap")
    add_grid(p)

    p = add_sub("tfim-ff", "chain quench via momentum modes")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--g0", type=float, required=True)
    p.add_argument("--gf", type=float, required=True)
    p.add_argument("--coupling", type=float, default=1.0)
    add_grid(p)

    p = add_sub("thermo", "thermodynamic-limit rate function")
    p.add_argument("--g0", type=float, required=True)
    p.add_argument("--gf", type=float, required=True)
    p.add_argument("--nodes", type=int, default=256)
    add_grid(p, t_max=5.0, points=10001)

    p = add_sub("rabi", "two-level survival and rate")
    p.add_argument("--g", type=float, required=True, help="level splitting")
    p.add_argument("--weight", type=float, default=0.5)
    add_grid(p, t_max=8.0, points=1601)

    p = add_sub("ladder", "equally spaced levels, quantum revivals")
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--omega", type=float, default=1.0)
    add_grid(p, t_max=4.0 * 2.0 * np.pi, points=4001)

    p = add_sub("bose-site", "single-site collapse and revival")
    p.add_argument("--nbar", type=float, default=2.0)
    p.add_argument("--U", type=float, default=1.0)
    p.add_argument("--nmax", type=int, default=None)
    add_grid(p, t_max=8.0 * np.pi, points=8001)

    p = add_sub("scars", "tower-plus-background revival model")
    p.add_argument("--tower", type=int, default=8)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--background", type=int, default=512)
    p.add_argument("--bandwidth", type=float, default=None, help="default 8*omega")
    p.add_argument("--epsilon", type=float, default=0.05, help="tower-background coupling")
    add_grid(p, t_max=3.5 * 2.0 * np.pi, points=3501)

    add_sub("paper-suite", "run the built-in claim-verification suite")
    return parser


_GRIDLESS = ("paper-suite",)


def parse_config(argv) -> ExperimentConfig:
    """Parse and validate argv into a config (raises UsageError)."""
    ns = build_parser().parse_args(argv)
    grid = None
    if ns.subcommand not in _GRIDLESS:
        if ns.points < 2:
            raise UsageError("precondition violated: --points must be >= 2")
        if not ns.t_min < ns.t_max:
            raise UsageError("precondition violated: need --t-min < --t-max")
        grid = TimeGrid(ns.t_min, ns.t_max, ns.points)
    params = {
        k: v
        for k, v in vars(ns).items()
        if k not in ("output_dir", "format", "seed", "threads", "subcommand", "t_min", "t_max", "points")
    }
    _validate(ns.subcommand, params)
    threads = ns.threads
    if threads is None and os.environ.get("LOSCHMIDT_THREADS"):
        try:
            threads = int(os.environ["LOSCHMIDT_THREADS"])
        except ValueError as exc:
            raise UsageError(f"bad LOSCHMIDT_THREADS value: {exc}") from exc
    if threads is not None and threads < 1:
        raise UsageError("precondition violated: --threads must be >= 1")
    return ExperimentConfig(ns.subcommand, params, grid, ns.output_dir, ns.seed, ns.format, threads)


def _validate(subcommand, p):
    if subcommand == "tfim-ed":
        if p["L"] < 1:
            raise UsageError("precondition violated: L must be >= 1")
        if p["L"] > DENSE_CAP and not p["krylov"]:
            raise UsageError(
                f"precondition violated: dense cap exceeded (L={p['L']} > {DENSE_CAP}); "
                "pass --krylov to use the Lanczos propagator"
            )
        if p["boundary"] == "periodic" and p["L"] < 2:
            raise UsageError("precondition violated: periodic boundary needs L >= 2")
    elif subcommand == "tfim-ff":
        if p["L"] < 2 or p["L"] % 2:
            raise UsageError("precondition violated: L must be even and >= 2")
        if p["g0"] < 0 or p["gf"] < 0:
            raise UsageError("precondition violated: fields must be non-negative")
    elif subcommand == "thermo":
        if p["nodes"] < 64:
            raise UsageError("precondition violated: --nodes must be >= 64")
        if p["g0"] < 0 or p["gf"] < 0:
            raise UsageError("precondition violated: fields must be non-negative")
    elif subcommand == "rabi":
        if p["g"] <= 0:
            raise UsageError("precondition violated: splitting --g must be positive")
        if not 0.0 <= p["weight"] <= 1.0:
            raise UsageError("precondition violated: --weight must lie in [0, 1]")
    elif subcommand == "ladder":
        if p["levels"] < 2:
            raise UsageError("precondition violated: --levels must be >= 2")
        if p["omega"] <= 0:
            raise UsageError("precondition violated: --omega must be positive")
    elif subcommand == "bose-site":
        if p["nbar"] <= 0 or p["U"] <= 0:
            raise UsageError("precondition violated: --nbar and --U must be positive")
        if p["nmax"] is not None and p["nmax"] < 1:
            raise UsageError("precondition violated: --nmax must be >= 1")
    elif subcommand == "scars":
        if p["tower"] < 2:
            raise UsageError("precondition violated: --tower must be >= 2")
        if p["background"] < 0:
            raise UsageError("precondition violated: --background must be >= 0")
        if p["omega"] <= 0:
            raise UsageError("precondition violated: --omega must be positive")
        if p["epsilon"] < 0:
            raise UsageError("precondition violated: --epsilon must be >= 0")


def _run_dir(config):
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    base = Path(config.output_dir)
    path = base / f"{config.subcommand}-{stamp}"
    n = 1
    while path.exists():
        path = base / f"{config.subcommand}-{stamp}-{n}"
        n += 1
    path.mkdir(parents=True)
    return path


def _trace_checks(trace):
    checks = {
        "echo_in_unit_interval": bool(np.all((trace.echo >= -1e-12) & (trace.echo <= 1.0 + 1e-12))),
        "rate_nonnegative": bool(np.all(trace.rate[np.isfinite(trace.rate)] >= -1e-12)),
    }
    at_zero = np.isclose(trace.times, 0.0, atol=1e-15)
    if at_zero.any():
        checks["echo_one_at_t0"] = bool(abs(trace.echo[at_zero][0] - 1.0) < 1e-12)
    return checks


def _write_trace(trace, outdir, fmt, name="trace"):
    if fmt == "csv":
        path = outdir / f"{name}.csv"
        trace.write_csv(path)
    else:
        path = outdir / f"{name}.json"
        payload = {
            "t": list(map(float, trace.times)),
            "echo": list(map(float, trace.echo)),
            "rate": [float(r) if np.isfinite(r) else "inf" for r in trace.rate],
            "size_L": trace.size_L,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)
            fh.write("\n")
    return path


def _write_cusps(trace, outdir):
    path = outdir / "cusps.json"
    with open(path, "w") as fh:
        fh.write(rate_analysis.detect_cusps(trace).to_json())
        fh.write("\n")
    return path


def run(config: ExperimentConfig) -> RunManifest:
    """Dispatch one experiment, write outputs, return the manifest."""
    _kernels.set_threads(config.threads)
    t0 = time.perf_counter()
    outdir = _run_dir(config)
    files = []
    checks = {}
    sub = config.subcommand

    if sub == "tfim-ed":
        p = config.params
        spec0 = ChainSpec(p["L"], p["g0"], p["boundary"], p["coupling"])
        specf = ChainSpec(p["L"], p["gf"], p["boundary"], p["coupling"])
        hf = build_tfim(specf)
        if p["initial"] == "ground":
            _, psi0 = ed_engine.ground_state(build_tfim(spec0), parity="even")
        else:
            psi0 = product_state_z(p["L"], +1 if p["initial"] == "z+" else -1)
        if p["krylov"]:
            trace = _krylov_trace(hf, psi0, config.grid, p["L"])
        else:
            trace = ed_engine.loschmidt_trace(hf, psi0, config.grid, p["L"])
        files.append(_write_trace(trace, outdir, config.format))
        files.append(_write_cusps(trace, outdir))
        checks.update(_trace_checks(trace))

    elif sub == "tfim-ff":
        p = config.params
        modes = free_fermion.build_modes(p["g0"], p["gf"], p["L"], p["coupling"])
        trace = free_fermion.finite_trace(modes, config.grid)
        files.append(_write_trace(trace, outdir, config.format))
        files.append(_write_cusps(trace, outdir))
        crit = free_fermion.critical_times(p["g0"], p["gf"], 8, p["coupling"])
        path = outdir / "critical_times.json"
        with open(path, "w") as fh:
            fh.write(crit.to_json())
            fh.write("\n")
        files.append(path)
        checks.update(_trace_checks(trace))
        checks["critical_mode_found"] = crit.has_critical_mode

    elif sub == "thermo":
        p = config.params
        thermo = free_fermion.thermo_rate(p["g0"], p["gf"], config.grid, p["nodes"])
        path = outdir / "rate.csv"
        with open(path, "w") as fh:
            fh.write("t,rate,error\n")
            for t, r, e in zip(thermo.times, thermo.rate, thermo.error_estimate):
                fh.write(f"{t:.17g},{r:.17g},{e:.17g}\n")
        files.append(path)
        crit = free_fermion.critical_times(p["g0"], p["gf"], 8)
        path = outdir / "critical_times.json"
        with open(path, "w") as fh:
            fh.write(crit.to_json())
            fh.write("\n")
        files.append(path)
        checks["quadrature_nodes"] = thermo.quadrature_nodes
        checks["quadrature_max_error"] = thermo.max_error
        checks["rate_nonnegative"] = bool(np.all(thermo.rate >= -1e-12))

    elif sub == "rabi":
        p = config.params
        two = essential_states.TwoLevelSpec(p["g"], p["weight"])
        echo = essential_states.two_level_echo(two, config.grid.times)
        trace = rate_analysis.rate_from_echo(
            ed_engine.LoschmidtTrace(config.grid.times, echo, np.zeros_like(echo), 1)
        )
        files.append(_write_trace(trace, outdir, config.format))
        files.append(_write_cusps(trace, outdir))
        checks.update(_trace_checks(trace))

    elif sub == "ladder":
        p = config.params
        spec = essential_states.uniform_ladder(p["levels"], p["omega"])
        echo = essential_states.ladder_echo(spec, config.grid.times)
        trace = rate_analysis.rate_from_echo(
            ed_engine.LoschmidtTrace(config.grid.times, echo, np.zeros_like(echo), 1)
        )
        files.append(_write_trace(trace, outdir, config.format))
        checks.update(_trace_checks(trace))

    elif sub == "bose-site":
        p = config.params
        spec = essential_states.BoseSiteSpec(p["nbar"], p["U"], p["nmax"])
        echo = essential_states.bose_site_echo(spec, config.grid.times)
        trace = rate_analysis.rate_from_echo(
            ed_engine.LoschmidtTrace(config.grid.times, echo, np.zeros_like(echo), 1)
        )
        files.append(_write_trace(trace, outdir, config.format))
        files.append(_write_cusps(trace, outdir))
        checks.update(_trace_checks(trace))
        checks["truncation"] = spec.truncation

    elif sub == "scars":
        p = config.params
        bandwidth = p["bandwidth"] if p["bandwidth"] is not None else 8.0 * p["omega"]
        spec = essential_states.ScarSpec(
            p["tower"], p["omega"], p["background"], bandwidth, p["epsilon"], config.seed
        )
        h = essential_states.build_scar_hamiltonian(spec)
        psi0 = essential_states.tower_state(spec)
        trace = ed_engine.loschmidt_trace(h, psi0, config.grid, 1)
        files.append(_write_trace(trace, outdir, config.format))
        energies, weights = essential_states.scar_overlap_profile(h, psi0)
        path = outdir / "overlaps.csv"
        with open(path, "w") as fh:
            fh.write("energy,weight\n")
            for e, w in zip(energies, weights):
                fh.write(f"{e:.17g},{w:.17g}\n")
        files.append(path)
        checks.update(_trace_checks(trace))
        checks["near_tower_weight"] = essential_states.near_tower_weight(
            energies, weights, spec.tower_energies, 0.25 * p["omega"]
        )

    elif sub == "paper-suite":
        results = suite.run_paper_suite()
        print(suite.format_table(results))
        path = outdir / "suite.json"
        with open(path, "w") as fh:
            json.dump(
                [
                    {"name": r.name, "passed": r.passed, "detail": r.detail, "runtime_s": r.runtime_s}
                    for r in results
                ],
                fh,
                indent=2,
            )
            fh.write("\n")
        files.append(path)
        checks["all_passed"] = all(r.passed for r in results)

    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown subcommand {sub!r}")

    manifest = RunManifest(
        subcommand=sub,
        config={
            "params": config.params,
            "grid": None
            if config.grid is None
            else {"t_start": config.grid.t_start, "t_end": config.grid.t_end, "n_points": config.grid.n_points},
            "seed": config.seed,
            "format": config.format,
            "threads": config.threads,
        },
        version=__version__,
        wall_time_s=time.perf_counter() - t0,
        files=[p.name for p in files],
        checks=checks,
    )
    manifest.write(outdir / "manifest.json")
    print(f"wrote {outdir}")
    return manifest


def _krylov_trace(h, psi0, grid, size_L):
    times = grid.times
    echo = np.empty(times.shape[0])
    psi = np.asarray(psi0, dtype=np.complex128)
    prev_t = times[0]
    psi = ed_engine.krylov_evolve(h, psi, prev_t) if prev_t != 0.0 else psi.copy()
    for i, t in enumerate(times):
        if t != prev_t:
            psi = ed_engine.krylov_evolve(h, psi, t - prev_t)
            prev_t = t
        amp = np.vdot(psi0, psi)
        echo[i] = abs(amp) ** 2
    with np.errstate(divide="ignore"):
        rate = np.where(echo > 0.0, -np.log(np.maximum(echo, 1e-300)) / size_L, np.inf) + 0.0
    return ed_engine.LoschmidtTrace(times, echo, rate, size_L)


_MODULE_OF = {
    "tfim-ed": "ed_engine",
    "tfim-ff": "free_fermion",
    "thermo": "free_fermion",
    "rabi": "essential_states",
    "ladder": "essential_states",
    "bose-site": "essential_states",
    "scars": "essential_states",
    "paper-suite": "suite",
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        manifest = run(config)
    except (ValueError, RuntimeError, OSError) as exc:
        module = _MODULE_OF.get(config.subcommand, "cli")
        print(f"runtime failure [{module}]: {exc}", file=sys.stderr)
        return 1
    if config.subcommand == "paper-suite" and not manifest.checks["all_passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
