"""Rate functions from echo traces, cusp detection, finite-size scans.

A "cusp" at finite grid resolution is a classification heuristic: a
local rate maximum whose discrete curvature stands far above the
trace's median curvature, or one that brackets an infinite-rate
sentinel.  True non-analyticity only exists in the thermodynamic-limit
rate; the quadrature route is the ground truth for that.
"""

import json
from dataclasses import dataclass

import numpy as np

from .ed_engine import LoschmidtTrace, TimeGrid
from .free_fermion import build_modes, finite_trace

DEFAULT_CURVATURE_THRESHOLD = 10.0
MIN_POINTS_PER_PERIOD = 8
PEAK_FLOOR = 1e-12


@dataclass(frozen=True)
class QuenchSpec:
    """One sudden quench g_initial -> g_final on an L-site chain."""

    g_initial: float
    g_final: float
    L: int
    grid: TimeGrid
    boundary: str = "periodic"


@dataclass
class CuspReport:
    """Local rate maxima with their curvature scores and classification."""

    cusp_times: np.ndarray
    sharpness: np.ndarray
    classification: list
    grid_spacing: float
    coarse_grid: bool = False

    def __len__(self):
        return self.cusp_times.shape[0]

    def cusps_only(self):
        mask = np.array([c == "cusp" for c in self.classification], dtype=bool)
        return self.cusp_times[mask]

    def to_json(self):
        return json.dumps(
            {
                "cusp_times": [float(t) for t in self.cusp_times],
                "sharpness": [float(s) for s in self.sharpness],
                "classification": list(self.classification),
            }
        )


def rate_from_echo(trace: LoschmidtTrace) -> LoschmidtTrace:
    """Fill the rate column from the echo column.

    Echo values below -1e-12 mean the trace is corrupted; values in
    [-1e-12, 0] are rounding and clamp to zero (infinite rate).
    """
    echo = np.asarray(trace.echo, dtype=np.float64)
    if np.any(echo < -1e-12):
        raise ValueError(f"corrupted trace: echo minimum {echo.min()} is negative")
    echo = np.maximum(echo, 0.0)
    with np.errstate(divide="ignore"):
        rate = np.where(echo > 0.0, -np.log(np.maximum(echo, 1e-300)) / trace.size_L, np.inf) + 0.0
    return LoschmidtTrace(np.asarray(trace.times), echo, rate, trace.size_L)


def _local_maxima(rate):
    """Interior indices that top both neighbours (infs dominate)."""
    idx = []
    for i in range(1, rate.shape[0] - 1):
        left, mid, right = rate[i - 1], rate[i], rate[i + 1]
        if mid <= PEAK_FLOOR:
            continue
        if mid >= left and mid >= right and (mid > left or mid > right):
            idx.append(i)
    return idx


def detect_cusps(trace, curvature_threshold=DEFAULT_CURVATURE_THRESHOLD) -> CuspReport:
    """Locate rate maxima on a uniform grid and classify cusp vs smooth.

    The curvature score of a maximum is |second difference| / dt^2;
    "cusp" means the score exceeds threshold x (median trace curvature)
    or the maximum touches an infinite-rate sentinel.
    """
    times = np.asarray(trace.times, dtype=np.float64)
    rate = np.asarray(trace.rate, dtype=np.float64)
    if times.shape[0] < 3:
        raise ValueError("need at least 3 grid points")
    steps = np.diff(times)
    dt = steps[0]
    if not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
        raise ValueError("detect_cusps requires a uniform time grid")

    second = np.abs(rate[:-2] - 2.0 * rate[1:-1] + rate[2:]) / dt**2
    finite_curv = second[np.isfinite(second)]
    median_curv = float(np.median(finite_curv)) if finite_curv.size else 0.0
    floor = max(median_curv, 1e-30)

    peaks = _local_maxima(rate)
    scores = []
    kinds = []
    for i in peaks:
        window = rate[i - 1 : i + 2]
        if not np.all(np.isfinite(window)):
            scores.append(np.inf)
            kinds.append("cusp")
            continue
        score = float(second[i - 1])
        scores.append(score)
        kinds.append("cusp" if score > curvature_threshold * floor else "smooth_max")

    coarse = False
    if len(peaks) >= 2:
        min_gap = np.min(np.diff(times[peaks]))
        coarse = bool(min_gap < MIN_POINTS_PER_PERIOD * dt)
    return CuspReport(times[peaks], np.array(scores), kinds, float(dt), coarse)


@dataclass
class ScalingScan:
    """First-rate-peak location and curvature for a family of sizes."""

    sizes: np.ndarray
    peak_times: np.ndarray
    peak_sharpness: np.ndarray

    def to_csv(self):
        lines = ["L,peak_time,sharpness"]
        for L, t, s in zip(self.sizes, self.peak_times, self.peak_sharpness):
            lines.append(f"{int(L)},{t:.17g},{s:.17g}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_csv())


def scaling_scan(quench: QuenchSpec, sizes) -> ScalingScan:
    """Finite-chain scan of the first rate peak across system sizes.

    Sizes must be even and strictly increasing.  Entries are NaN when
    the rate has no peak (for example when g_initial = g_final).
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    if np.any(np.diff(sizes) <= 0):
        raise ValueError("sizes must be strictly increasing")
    peak_times = np.full(sizes.shape, np.nan)
    sharpness = np.full(sizes.shape, np.nan)
    dt = quench.grid.dt
    for j, L in enumerate(sizes):
        trace = finite_trace(build_modes(quench.g_initial, quench.g_final, int(L)), quench.grid)
        peaks = _local_maxima(trace.rate)
        if not peaks:
            continue
        i = peaks[0]
        peak_times[j] = trace.times[i]
        window = trace.rate[i - 1 : i + 2]
        if np.all(np.isfinite(window)):
            sharpness[j] = abs(window[0] - 2.0 * window[1] + window[2]) / dt**2
        else:
            sharpness[j] = np.inf
    return ScalingScan(sizes, peak_times, sharpness)


def rate_bound_from_dominant_overlap(weights, size_L):
    """Upper bound on the rate when one spectral weight dominates.

    The echo amplitude can never drop below w0 - sum(others), so when
    that floor is positive the rate stays below -ln(floor^2) / size_L.
    Returns +inf when the bound's argument is not positive.
    """
    w = np.sort(np.asarray(weights, dtype=np.float64))[::-1]
    floor = w[0] - w[1:].sum()
    if floor <= 0.0:
        return np.inf
    return -2.0 * np.log(floor) / size_L
