"""Chaos diagnostics: Lyapunov exponents, bifurcation scans, histograms,
sensitivity probes and cobweb traces.

All sweeps are deterministic: worker threads only change wall time, never
the returned values or their order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, Sequence

import numpy as np
from scipy import stats

from . import _kernels as K
from .errors import DegenerateOrbit, PerturbationLost
from .maps import (DEFAULT_HCM2, Hcm2Config, MapParams, Trajectory, _kernel_args,
                   iterate, proposed_step)

Axis = Literal["r1", "r2"]

MAX_ZERO_RUN = 100


@dataclass(frozen=True)
class LyapunovResult:
    r1: float | None
    r2: float | None
    exponent: float
    n_iters: int
    n_renorm: int
    degenerate: bool = False


@dataclass(frozen=True)
class BifurcationPoint:
    r: float
    x: float


@dataclass
class HistogramReport:
    bin_counts: np.ndarray
    n_samples: int
    n_bins: int
    chi2: float
    p_value: float

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_bins + 1)


@dataclass
class SensitivityReport:
    divergence_step: int | None
    max_gap: float
    perturbation: float
    base: np.ndarray
    perturbed: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        return np.abs(self.base - self.perturbed)


def sweep_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """``n`` evenly spaced values in (lo, hi].

    The left end is excluded: at r1 = 0 the first HCM1 branch vanishes
    identically and every orbit is absorbed at 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return lo + (hi - lo) * np.arange(1, n + 1, dtype=np.float64) / n


def _pmap(fn, items, workers):
    if not workers or workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- Lyapunov -----------------------------------------------------------------

def lyapunov_from_step(step: Callable[[float], float], x0: float,
                       n_iters: int, d0: float = 1e-10, burn_in: int = 0,
                       *, r1=None, r2=None) -> LyapunovResult:
    """Largest exponent of a 1-D map by two-trajectory renormalisation.

    Each step the companion orbit sits ``d0`` away from the base orbit; the
    log stretch ``ln(d/d0)`` is accumulated and the companion is put back at
    distance ``d0`` along the current separation direction. Works for any
    scalar map, which is what the logistic/tent calibrations use.
    """
    x = x0
    for _ in range(burn_in):
        x = step(x)
    total = 0.0
    counted = 0
    zero_run = 0
    direction = 1.0
    for _ in range(n_iters):
        y = x + direction * d0
        if y >= 1.0 or y < 0.0:
            y = x - direction * d0
        x_next = step(x)
        y_next = step(y)
        d = abs(y_next - x_next)
        if d == 0.0:
            zero_run += 1
            if zero_run > MAX_ZERO_RUN:
                result = LyapunovResult(r1, r2, -math.inf, n_iters, counted,
                                        degenerate=True)
                raise DegenerateOrbit(
                    f"companion orbit coincided for {zero_run} steps", result)
        else:
            zero_run = 0
            total += math.log(d / d0)
            counted += 1
            direction = 1.0 if y_next > x_next else -1.0
        x = x_next
    return LyapunovResult(r1, r2, total / counted, n_iters, counted)


def lyapunov_estimate(params: MapParams, cfg: Hcm2Config = DEFAULT_HCM2,
                      n_iters: int = 5000, d0: float = 1e-10,
                      burn_in: int = 100,
                      method: Literal["stage", "step"] = "stage") -> LyapunovResult:
    """Largest Lyapunov exponent of the hybrid map, nats per iteration.

    ``method="stage"`` renormalises the companion after each internal stage
    (HCM1, HCM1, HCM2 pair, composition). One full step stretches by about
    1e15, so ``method="step"`` saturates and returns roughly ``-ln(d0)``
    rather than the exponent; it is kept for comparison only.
    """
    if n_iters < 1000:
        raise ValueError("n_iters must be >= 1000")
    if not 0.0 < d0 <= 1e-9:
        raise ValueError("d0 must lie in (0, 1e-9]")
    if method == "step":
        return lyapunov_from_step(lambda x: proposed_step(params, cfg, x),
                                  params.x0, n_iters, d0, burn_in,
                                  r1=params.r1, r2=params.r2)
    if method != "stage":
        raise ValueError(f"unknown method {method!r}")
    total, counted, renorm, worst = K.staged_lyapunov(
        *_kernel_args(params, cfg), float(params.x0), int(n_iters),
        int(burn_in), float(d0))
    if worst > MAX_ZERO_RUN or counted == 0:
        result = LyapunovResult(params.r1, params.r2, -math.inf, n_iters,
                                renorm, degenerate=True)
        raise DegenerateOrbit(
            f"companion orbit coincided for {worst} steps", result)
    return LyapunovResult(params.r1, params.r2, total / counted, n_iters,
                          renorm)


def lyapunov_sweep(params: MapParams, cfg: Hcm2Config = DEFAULT_HCM2,
                   axis: Axis = "r1", r_values: Iterable[float] | None = None,
                   n_iters: int = 5000, d0: float = 1e-10,
                   workers: int | None = None,
                   method: Literal["stage", "step"] = "stage") -> list[LyapunovResult]:
    """Exponent along one parameter axis; the other comes from ``params``.

    Degenerate orbits are returned as ``exponent = -inf`` rows rather than
    aborting the sweep.
    """
    if r_values is None:
        r_values = sweep_grid(0.0, 1.0, 50)

    def one(r):
        p = params.with_(**{axis: float(r)})
        try:
            return lyapunov_estimate(p, cfg, n_iters, d0, method=method)
        except DegenerateOrbit as exc:
            return exc.result

    return _pmap(one, list(r_values), workers)


# -- bifurcation --------------------------------------------------------------

def bifurcation_scan(cfg: Hcm2Config = DEFAULT_HCM2, sweep_axis: Axis = "r1",
                     fixed_other: float = 0.3,
                     r_range: tuple[float, float] = (0.0, 1.0), n_r: int = 100,
                     x0: float = 0.5, burn_in: int = 500, n_keep: int = 200,
                     params: MapParams | None = None,
                     workers: int | None = None) -> list[BifurcationPoint]:
    """Post-transient states for ``n_r`` parameter values from ``sweep_grid``.

    Output is ordered by r, then by step. ``params`` only supplies the
    composition settings (gamma, phi1, phi2).
    """
    if n_r < 1 or burn_in < 0 or n_keep < 1:
        raise ValueError("need n_r >= 1, burn_in >= 0, n_keep >= 1")
    if sweep_axis not in ("r1", "r2"):
        raise ValueError(f"sweep_axis must be 'r1' or 'r2', got {sweep_axis!r}")
    base = (params or MapParams()).with_(x0=x0)
    other = "r2" if sweep_axis == "r1" else "r1"
    base = base.with_(**{other: float(fixed_other)})
    rs = sweep_grid(r_range[0], r_range[1], n_r)

    def one(r):
        p = base.with_(**{sweep_axis: float(r)})
        return iterate(p, cfg, n_keep, burn_in).samples

    orbits = _pmap(one, list(rs), workers)
    return [BifurcationPoint(float(r), float(x))
            for r, xs in zip(rs, orbits) for x in xs]


def occupied_bins(samples: Sequence[float], n_bins: int = 20) -> int:
    idx = np.minimum((np.asarray(samples) * n_bins).astype(np.int64), n_bins - 1)
    return int(np.unique(idx).size)


# -- histogram ----------------------------------------------------------------

def chi_square_uniform(counts) -> tuple[float, float]:
    """Pearson chi-square of ``counts`` against equal expected counts."""
    counts = np.asarray(counts, dtype=np.float64)
    expected = counts.sum() / counts.size
    chi2 = float(((counts - expected) ** 2).sum() / expected)
    p = float(stats.chi2.sf(chi2, counts.size - 1))
    return chi2, p


def histogram_uniformity(traj: Trajectory | Sequence[float],
                         n_bins: int = 100) -> HistogramReport:
    samples = traj.samples if isinstance(traj, Trajectory) else np.asarray(traj)
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    if len(samples) == 0:
        raise ValueError("empty trajectory")
    idx = np.floor(np.asarray(samples, dtype=np.float64) * n_bins).astype(np.int64)
    counts = np.bincount(np.clip(idx, 0, n_bins - 1), minlength=n_bins)
    chi2, p = chi_square_uniform(counts)
    return HistogramReport(counts, int(counts.sum()), n_bins, chi2, p)


# -- sensitivity --------------------------------------------------------------

def sensitivity_probe(params: MapParams, cfg: Hcm2Config = DEFAULT_HCM2,
                      perturb_target: Literal["x0", "r1", "r2"] = "x0",
                      delta: float = 1e-16, horizon: int = 100,
                      threshold: float = 0.1) -> SensitivityReport:
    """Compare the orbit from ``params`` with one scalar shifted by ``delta``.

    Both orbits include the start (index 0) and run ``horizon`` steps.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if delta == 0:
        raise ValueError("delta must be non-zero")
    old = getattr(params, perturb_target)
    new = old + delta
    if new == old:
        raise PerturbationLost(
            f"{perturb_target}={old!r} absorbs delta={delta!r} in float64")
    pert = params.with_(**{perturb_target: new})
    base = np.concatenate(([params.x0], iterate(params, cfg, horizon).samples))
    other = np.concatenate(([pert.x0], iterate(pert, cfg, horizon).samples))
    gaps = np.abs(base - other)
    over = np.flatnonzero(gaps > threshold)
    first = int(over[0]) if over.size else None
    return SensitivityReport(first, float(gaps.max()), float(delta), base, other)


# -- cobweb -------------------------------------------------------------------

Segment = tuple[tuple[float, float], tuple[float, float]]


def cobweb_trace(params: MapParams, cfg: Hcm2Config = DEFAULT_HCM2,
                 n_steps: int = 100) -> list[Segment]:
    """Cobweb segments: vertical to the graph, then horizontal to the diagonal."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    xs = np.concatenate(([params.x0], iterate(params, cfg, n_steps).samples))
    segments: list[Segment] = []
    for a, b in zip(xs[:-1].tolist(), xs[1:].tolist()):
        segments.append(((a, a), (a, b)))
        segments.append(((a, b), (b, b)))
    return segments
