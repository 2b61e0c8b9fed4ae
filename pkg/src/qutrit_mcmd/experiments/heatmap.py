"""Readout error over a grid of prepared qutrit distributions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..iq import BlobModel, default_blob_model
from ..measurement import MeasurementNoise
from ..rem import AssignmentMatrix, hellinger, mitigate
from ..rng import CALIBRATION, GRID, IQ, task_rng
from .readout import MCMDReadout, QDAReadout

DISCRIMINATORS = ("mcmd", "qda")


@dataclass(frozen=True)
class HeatmapConfig:
    grid_step: float = 0.1
    shots_per_point: int = 1000
    discriminator: str = "mcmd"
    rem: bool = True
    noise: MeasurementNoise = field(default_factory=MeasurementNoise)
    blob: BlobModel = field(default_factory=default_blob_model)
    calibration_shots: int | None = None
    training_shots: int = 3000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.grid_step <= 1.0:
            raise ValueError("grid_step must be in (0, 1]")
        if self.shots_per_point < 1:
            raise ValueError("shots_per_point must be >= 1")
        if self.discriminator not in DISCRIMINATORS:
            raise ValueError(f"discriminator must be one of {DISCRIMINATORS}")


@dataclass
class HeatmapPoint:
    prepared: np.ndarray
    raw: np.ndarray
    mitigated: np.ndarray | None
    dh_raw: float
    dh_rem: float | None


@dataclass
class HeatmapResult:
    points: list
    assignment: AssignmentMatrix | None

    def dh_raw(self) -> np.ndarray:
        return np.array([p.dh_raw for p in self.points])

    def dh_rem(self) -> np.ndarray:
        return np.array([np.nan if p.dh_rem is None else p.dh_rem for p in self.points])

    def prepared(self) -> np.ndarray:
        return np.array([p.prepared for p in self.points])


def simplex_grid(step: float) -> np.ndarray:
    """Points (q0, q1, q2) with q1, q2 on multiples of ``step``, ordered by q1 then q2."""
    n = int(np.floor(1.0 / step + 1e-9))
    pts = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            q1, q2 = i * step, j * step
            if q1 + q2 > 1.0 + 1e-9:
                continue
            q0 = max(1.0 - q1 - q2, 0.0)
            pts.append((q0, q1, q2))
    pts = np.array(pts)
    return pts / pts.sum(axis=1, keepdims=True)


def make_readout(config: HeatmapConfig):
    if config.discriminator == "mcmd":
        return MCMDReadout(config.noise)
    return QDAReadout(config.blob, config.noise, config.training_shots, task_rng(config.seed, IQ))


def run_heatmap(config: HeatmapConfig) -> HeatmapResult:
    readout = make_readout(config)
    lam = None
    if config.rem:
        cal_shots = config.calibration_shots or config.shots_per_point
        lam = readout.calibrate(cal_shots, task_rng(config.seed, CALIBRATION))
    points = []
    for idx, v in enumerate(simplex_grid(config.grid_step)):
        rng = task_rng(config.seed, GRID, idx)
        freqs = readout.measure(v, config.shots_per_point, rng).frequencies(readout.labels)
        raw = readout.raw_estimate(freqs)
        mit = mitigate(lam, freqs) if lam is not None else None
        points.append(
            HeatmapPoint(
                v,
                raw,
                mit,
                hellinger(raw, v),
                hellinger(mit, v) if mit is not None else None,
            )
        )
    return HeatmapResult(points, lam)


def summarize_percentiles(before, after) -> dict:
    """Medians before and after mitigation and the relative reduction in percent."""
    before = np.asarray(before, dtype=float)
    after = np.asarray(after, dtype=float)
    if before.size == 0 or after.size == 0:
        raise ValueError("percentile summary needs nonempty samples")
    p50_before = float(np.percentile(before, 50))
    p50_after = float(np.percentile(after, 50))
    if p50_before > 0:
        reduction = (1.0 - p50_after / p50_before) * 100.0
    elif p50_after == 0:
        reduction = 0.0
    else:
        reduction = None
    return {"p50_before": p50_before, "p50_after": p50_after, "reduction_percent": reduction}


def region_means(result: HeatmapResult, mask_fn) -> tuple[float, float, int]:
    """Mean and standard error of raw distances over grid points selected by ``mask_fn(q)``."""
    q = result.prepared()
    d = result.dh_raw()
    sel = np.array([bool(mask_fn(row)) for row in q])
    vals = d[sel]
    if vals.size == 0:
        raise ValueError("region selects no grid points")
    se = vals.std(ddof=1) / np.sqrt(vals.size) if vals.size > 1 else 0.0
    return float(vals.mean()), float(se), int(vals.size)
