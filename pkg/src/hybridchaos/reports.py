"""CSV writers. Comma separated, one header row, LF line endings."""

from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Iterable, Sequence

from .crypto import DiffMetrics
from .dynamics import (BifurcationPoint, HistogramReport, LyapunovResult,
                       SensitivityReport, Segment)
from .maps import Trajectory

TRAJECTORY_HEADER = ("step", "x")
LYAPUNOV_HEADER = ("r1", "r2", "lambda", "n_iters")
BIFURCATION_HEADER = ("r", "x")
HISTOGRAM_HEADER = ("bin_lo", "bin_hi", "count")
SENSITIVITY_HEADER = ("step", "x_base", "x_pert", "gap")
COBWEB_HEADER = ("x_from", "y_from", "x_to", "y_to")
METRICS_HEADER = ("channel", "npcr", "uaci")


def write_csv(path: str | os.PathLike, header: Sequence[str],
              rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def write_trajectory(path, traj: Trajectory, first_step: int = 1) -> Path:
    rows = ((first_step + i, x) for i, x in enumerate(traj.samples.tolist()))
    return write_csv(path, TRAJECTORY_HEADER, rows)


def write_lyapunov(path, results: Iterable[LyapunovResult]) -> Path:
    return write_csv(path, LYAPUNOV_HEADER,
                     ((r.r1, r.r2, r.exponent, r.n_iters) for r in results))


def write_bifurcation(path, points: Iterable[BifurcationPoint]) -> Path:
    return write_csv(path, BIFURCATION_HEADER, ((p.r, p.x) for p in points))


def write_histogram(path, report: HistogramReport) -> Path:
    edges = report.edges.tolist()
    rows = ((edges[i], edges[i + 1], int(c))
            for i, c in enumerate(report.bin_counts.tolist()))
    return write_csv(path, HISTOGRAM_HEADER, rows)


def write_sensitivity(path, report: SensitivityReport) -> Path:
    rows = ((i, a, b, abs(a - b)) for i, (a, b) in
            enumerate(zip(report.base.tolist(), report.perturbed.tolist())))
    return write_csv(path, SENSITIVITY_HEADER, rows)


def write_cobweb(path, segments: Iterable[Segment]) -> Path:
    return write_csv(path, COBWEB_HEADER,
                     ((a[0], a[1], b[0], b[1]) for a, b in segments))


def write_metrics(path, metrics: DiffMetrics) -> Path:
    return write_csv(path, METRICS_HEADER, metrics.rows())
