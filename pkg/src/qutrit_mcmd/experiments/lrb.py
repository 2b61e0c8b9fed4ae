"""Leakage randomized benchmarking read out with MCMD.

Each Clifford is RZ(a) SX RZ(b) SX RZ(c) with noiseless virtual Z gates
and a leaky SX. A sequence of m random Cliffords plus the inverting
Clifford is simulated on a density matrix, read out with noisy MCMD,
mitigated, and the |2> population is fitted to ``1 - A - B lam**m``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import clifford, kernels
from ..fitting import FitError, FitResult, fit_leakage_decay, fit_rb_decay
from ..measurement import MeasurementNoise
from ..qutrit import (
    PROJ01,
    PROJ2,
    Channel3,
    DensityMatrix3,
    depolarizing01_channel,
    gate_rx12,
    gate_rz01,
    gate_sx01,
    transition_channel,
)
from ..rng import CALIBRATION, SEQUENCE, SHOTS, task_rng
from .decay import NS, DEVICE_GATE_TIME, DEVICE_RATES, RateMatrix
from .readout import MCMDReadout


@dataclass(frozen=True)
class LeakyGateModel:
    """Error budget of one SX pulse.

    ``leak_angle`` is a coherent 1-2 rotation after the ideal SX; then
    ``depol_01`` depolarises the 01 block; then relaxation at ``rates``
    acts for ``gate_time`` seconds. ``drag_sigma`` is metadata only.
    """

    leak_angle: float = 0.0
    gate_time: float = DEVICE_GATE_TIME
    rates: RateMatrix = field(default_factory=RateMatrix)
    depol_01: float = 0.0
    drag_sigma: float = 1.78 * NS

    def __post_init__(self):
        if not self.gate_time > 0:
            raise ValueError("gate time must be positive")
        if not 0.0 <= self.depol_01 <= 1.0:
            raise ValueError("depol_01 must be a probability")

    def sx_channel(self) -> Channel3:
        ch = Channel3.from_gate(gate_rx12(self.leak_angle) @ gate_sx01())
        ch = ch.compose(depolarizing01_channel(self.depol_01))
        return ch.compose(transition_channel(self.rates.transfer(self.gate_time)))


# Leak angle and relaxation scale chosen so that the exact per-Clifford
# leakage and seepage rates are 4.2e-5 and 1.8e-3; see
# ``exact_leakage_rates`` and tests/test_lrb.py.
DEVICE_LEAK_ANGLE = 0.012970127003
DEVICE_RATE_SCALE = 1.1451319436


def device_leaky_gate() -> LeakyGateModel:
    return LeakyGateModel(DEVICE_LEAK_ANGLE, DEVICE_GATE_TIME, DEVICE_RATES.scaled(DEVICE_RATE_SCALE), 0.0)


def clifford_superops(model: LeakyGateModel) -> np.ndarray:
    """Noisy superoperator of every Clifford element, shape (24, 9, 9)."""
    sx = model.sx_channel().superop()
    out = np.empty((clifford.N_CLIFFORDS, 9, 9), dtype=complex)
    for k, (a, b, c) in enumerate(clifford.EULER_ANGLES):
        rz = [gate_rz01(t).superop() for t in (a, b, c)]
        out[k] = rz[0] @ sx @ rz[1] @ sx @ rz[2]
    return out


def _vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(9)


def exact_leakage_rates(model: LeakyGateModel) -> tuple[float, float]:
    """Per-Clifford leakage L1 and seepage L2 of the Clifford-averaged channel."""
    avg = clifford_superops(model).mean(axis=0)
    from_comp = (avg @ _vec(PROJ01 / 2)).reshape(3, 3)
    from_leak = (avg @ _vec(PROJ2)).reshape(3, 3)
    l1 = float(np.trace(PROJ2 @ from_comp).real)
    l2 = float(np.trace(PROJ01 @ from_leak).real)
    return l1, l2


def analytic_curves(model: LeakyGateModel, lengths) -> tuple[np.ndarray, np.ndarray]:
    """Noiseless-sampling limit of (p0, p2) using the Clifford-averaged channel."""
    avg = clifford_superops(model).mean(axis=0)
    rho = DensityMatrix3.basis(0).vec()
    p0, p2 = [], []
    for m in lengths:
        v = np.linalg.matrix_power(avg, int(m) + 1) @ rho
        d = v.reshape(3, 3).diagonal().real
        p0.append(d[0])
        p2.append(d[2])
    return np.array(p0), np.array(p2)


@dataclass(frozen=True)
class LRBConfig:
    lengths: tuple
    num_samples: int = 10
    shots: int | None = 3000
    leaky_gate: LeakyGateModel = field(default_factory=LeakyGateModel)
    noise: MeasurementNoise = field(default_factory=MeasurementNoise)
    calibration_shots: int | None = None
    seed: int = 0

    def __post_init__(self):
        lengths = tuple(int(m) for m in self.lengths)
        if not lengths or lengths[0] < 1 or any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise ValueError("lengths must be positive and strictly increasing")
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be >= 1")
        object.__setattr__(self, "lengths", lengths)


def default_lengths() -> tuple:
    return (1, 25, 50, 100, 200, 350, 500, 750, 1000, 1500, 2000, 3000)


@dataclass
class LRBResult:
    lengths: np.ndarray
    p0: np.ndarray
    p2: np.ndarray
    leak_fit: FitResult
    rb_fit: FitResult
    L1: float
    L1_err: float
    L2: float
    L2_err: float
    epc: float
    epc_err: float

    @property
    def A(self) -> float:
        return self.leak_fit["A"]

    @property
    def B(self) -> float:
        return self.leak_fit["B"]

    @property
    def lam(self) -> float:
        return self.leak_fit["lambda"]

    def to_dict(self) -> dict:
        fit = self.leak_fit.as_dict()
        return {
            "A": fit["A"],
            "B": fit["B"],
            "lambda": fit["lambda"],
            "L1": {"value": self.L1, "stderr": self.L1_err},
            "L2": {"value": self.L2, "stderr": self.L2_err},
            "epc": {"value": self.epc, "stderr": self.epc_err},
            "rb_fit": self.rb_fit.as_dict(),
            "lengths": self.lengths.tolist(),
            "p0_mean": self.p0.mean(axis=1).tolist(),
            "p2_mean": self.p2.mean(axis=1).tolist(),
        }


def leakage_from_fit(fit: FitResult) -> tuple[float, float, float, float]:
    """L1, its error, L2, its error; errors by linear propagation."""
    a, lam = fit["A"], fit["lambda"]
    i, j = fit.names.index("A"), fit.names.index("lambda")
    cov = fit.covariance[np.ix_([i, j], [i, j])]
    g1 = np.array([-(1 - lam), -(1 - a)])
    g2 = np.array([1 - lam, -a])
    l1 = (1 - a) * (1 - lam)
    l2 = a * (1 - lam)
    return l1, float(np.sqrt(max(g1 @ cov @ g1, 0))), l2, float(np.sqrt(max(g2 @ cov @ g2, 0)))


def simulate_populations(config: LRBConfig) -> np.ndarray:
    """True final populations, shape (len(lengths), num_samples, 3)."""
    superops = clifford_superops(config.leaky_gate)
    rho0 = DensityMatrix3.basis(0).vec()
    out = np.empty((len(config.lengths), config.num_samples, 3))
    for i, m in enumerate(config.lengths):
        for s in range(config.num_samples):
            seq = clifford.clifford_sequence(m, task_rng(config.seed, SEQUENCE, i, s))
            v = kernels.evolve_sequence(superops, np.asarray(seq, dtype=np.int64), rho0)
            d = np.clip(v.reshape(3, 3).diagonal().real, 0.0, None)
            out[i, s] = d / d.sum()
    return out


def run_lrb(config: LRBConfig) -> LRBResult:
    readout = MCMDReadout(config.noise)
    if config.shots is None:
        lam = readout.exact_assignment()
    else:
        lam = readout.calibrate(config.calibration_shots or config.shots, task_rng(config.seed, CALIBRATION))
    pops = simulate_populations(config)
    est = np.empty_like(pops)
    for i in range(pops.shape[0]):
        for s in range(pops.shape[1]):
            rng = task_rng(config.seed, SHOTS, i, s)
            est[i, s] = readout.measure_mitigated(pops[i, s], lam, config.shots, rng)
    lengths = np.asarray(config.lengths)
    m = np.repeat(lengths, config.num_samples)
    p0, p2 = est[:, :, 0], est[:, :, 2]
    try:
        leak_fit = fit_leakage_decay(m, p2.ravel())
        rb_fit = fit_rb_decay(m, p0.ravel())
    except FitError as exc:
        exc.diagnostics.update(lengths=lengths.tolist(), p0=p0.tolist(), p2=p2.tolist())
        raise
    l1, l1e, l2, l2e = leakage_from_fit(leak_fit)
    epc = (1 - rb_fit["alpha"]) / 2
    return LRBResult(lengths, p0, p2, leak_fit, rb_fit, l1, l1e, l2, l2e, epc, rb_fit.err("alpha") / 2)
