"""Three-level relaxation: rate equation, |2> decay experiment and rate fitting."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from ..fitting import FitError, FitResult, fit_least_squares
from ..measurement import MeasurementNoise
from ..qutrit import check_simplex
from ..rng import CALIBRATION, DELAY, task_rng
from .readout import MCMDReadout

US = 1e-6
NS = 1e-9


# scipy's expm has a triangular fast path that loses accuracy when diagonal
# entries (decay rates) nearly coincide; a fixed rotation sidesteps it.
_ROT = np.linalg.qr(np.array([[2.0, 1.0, 0.5], [0.3, 1.5, 1.0], [1.0, -0.7, 1.2]]))[0]


def _expm_dense(a: np.ndarray) -> np.ndarray:
    return _ROT.T @ expm(_ROT @ a @ _ROT.T) @ _ROT


@dataclass(frozen=True)
class RateMatrix:
    """Downward transition rates in 1/s; no thermal excitation."""

    gamma10: float = 0.0
    gamma20: float = 0.0
    gamma21: float = 0.0

    def __post_init__(self):
        for name in ("gamma10", "gamma20", "gamma21"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be a nonnegative rate, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_lifetimes_us(cls, t10_us=None, t20_us=None, t21_us=None) -> "RateMatrix":
        """Rates from lifetimes ``1/gamma`` in microseconds; ``None`` means zero."""
        def inv(t):
            return 0.0 if t is None or t == 0 or np.isinf(t) else 1.0 / (t * US)
        return cls(inv(t10_us), inv(t20_us), inv(t21_us))

    def generator(self) -> np.ndarray:
        """``G[i, j]`` is the |i> -> |j> rate; diagonal is minus the row sum."""
        g = np.zeros((3, 3))
        g[1, 0] = self.gamma10
        g[2, 0] = self.gamma20
        g[2, 1] = self.gamma21
        g -= np.diag(g.sum(axis=1))
        return g

    def transfer(self, t: float) -> np.ndarray:
        """Row-stochastic ``P[i, j]``: probability of |i> -> |j> after time ``t``."""
        p = _expm_dense(self.generator() * t)
        p = np.where(np.abs(p) < 1e-300, 0.0, p)
        p = np.clip(np.tril(p), 0.0, None)
        return p / p.sum(axis=1, keepdims=True)

    def scaled(self, factor: float) -> "RateMatrix":
        return RateMatrix(self.gamma10 * factor, self.gamma20 * factor, self.gamma21 * factor)

    def lifetimes_us(self) -> dict:
        return {
            name: (1.0 / (getattr(self, name) * US) if getattr(self, name) > 0 else float("inf"))
            for name in ("gamma10", "gamma20", "gamma21")
        }

    def as_array(self) -> np.ndarray:
        return np.array([self.gamma10, self.gamma20, self.gamma21])


DEVICE_RATES = RateMatrix.from_lifetimes_us(118.0, 417.0, 53.4)
DEVICE_GATE_TIME = 35.5 * NS


def rate_equation_solve(rates: RateMatrix, p0, times) -> np.ndarray:
    """Populations ``expm(G^T t) p0`` at each time, shape (len(times), 3)."""
    p0 = check_simplex(p0)
    times = np.asarray(times, dtype=float).reshape(-1)
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    out = np.empty((times.size, 3))
    for n, t in enumerate(times):
        p = np.clip(p0 @ rates.transfer(t), 0.0, None)
        out[n] = p / p.sum()
    return out


def seepage_bound(rates: RateMatrix, gate_time: float) -> float:
    """Population relaxing out of |2> during one two-SX Clifford."""
    if gate_time <= 0:
        raise ValueError("gate time must be positive")
    return 2.0 * gate_time * (rates.gamma20 + rates.gamma21)


def _initial_rates_per_us(t_us: np.ndarray, curves: np.ndarray) -> np.ndarray:
    p2 = curves[:, 2]
    mask = p2 > 1e-3
    if mask.sum() >= 2 and np.ptp(t_us[mask]) > 0:
        slope = -np.polyfit(t_us[mask], np.log(p2[mask]), 1)[0]
        g2 = max(float(slope), 0.0)
    else:
        g2 = 0.0
    if g2 == 0.0:
        return np.zeros(3)
    # Split the |2> decay by where the first relaxed population shows up.
    early = np.argmax(1.0 - p2 > 0.05) if np.any(1.0 - p2 > 0.05) else 1
    lost = max(1.0 - p2[early], 1e-9)
    f21 = float(np.clip(curves[early, 1] / lost, 0.05, 0.95))
    return np.array([g2, g2 * (1 - f21), g2 * f21])


def fit_rates(times, curves) -> FitResult:
    """Fit (gamma10, gamma20, gamma21) to the three population curves jointly.

    ``curves`` has shape (len(times), 3) and starts from |2>. Rates are
    returned in 1/s; internally they are fitted in 1/us.
    """
    t_us = np.asarray(times, dtype=float) / US
    curves = np.asarray(curves, dtype=float)
    start = np.array([0.0, 0.0, 1.0])

    def residuals(g):
        model = rate_equation_solve(RateMatrix(*(g / US)), start, t_us * US)
        return (model - curves).ravel()

    fit = fit_least_squares(
        residuals,
        _initial_rates_per_us(t_us, curves),
        ("gamma10", "gamma20", "gamma21"),
        bounds=(0.0, np.inf),
    )
    fit.values = fit.values / US
    fit.covariance = fit.covariance / US**2
    return fit


@dataclass
class DecayResult:
    rates: RateMatrix
    stderr: np.ndarray
    delays: np.ndarray
    curves: np.ndarray
    seepage_bound: float
    seepage_bound_err: float
    fit: FitResult = field(repr=False, default=None)

    def to_dict(self) -> dict:
        life = self.rates.lifetimes_us()
        names = ("gamma10", "gamma20", "gamma21")
        out = {
            "rates_per_s": {
                n: {"value": float(v), "stderr": float(e)}
                for n, v, e in zip(names, self.rates.as_array(), self.stderr)
            },
            "lifetimes_us": {n: float(life[n]) for n in names},
            "seepage_bound": {"value": self.seepage_bound, "stderr": self.seepage_bound_err},
            "delays_us": (self.delays / US).tolist(),
            "curves": {f"p{i}": self.curves[:, i].tolist() for i in range(3)},
        }
        if self.fit is not None:
            out["fit"] = {"ssr": self.fit.ssr, "dof": self.fit.dof, "nfev": self.fit.nfev}
        return out


def run_decay(
    rates: RateMatrix,
    delays,
    shots: int | None = 3000,
    noise: MeasurementNoise | None = None,
    seed: int = 0,
    gate_time: float = DEVICE_GATE_TIME,
    calibration_shots: int | None = None,
) -> DecayResult:
    """Prepare |2>, wait, read out with noisy MCMD plus REM, fit the rates.

    ``shots=None`` uses the exact outcome distributions (infinite shots).
    """
    noise = noise or MeasurementNoise()
    delays = np.asarray(delays, dtype=float)
    readout = MCMDReadout(noise)
    if shots is None:
        lam = readout.exact_assignment()
    else:
        lam = readout.calibrate(calibration_shots or shots, task_rng(seed, CALIBRATION))
    true = rate_equation_solve(rates, [0.0, 0.0, 1.0], delays)
    curves = np.empty_like(true)
    for n, pops in enumerate(true):
        curves[n] = readout.measure_mitigated(pops, lam, shots, task_rng(seed, DELAY, n))
    try:
        fit = fit_rates(delays, curves)
    except FitError as exc:
        exc.diagnostics.update(delays=delays.tolist(), curves=curves.tolist())
        raise
    fitted = RateMatrix(*np.clip(fit.values, 0.0, None))
    err = fit.stderr
    bound = seepage_bound(fitted, gate_time)
    cov = fit.covariance[1:, 1:]
    bound_err = float(2 * gate_time * np.sqrt(max(cov.sum(), 0.0)))
    return DecayResult(fitted, err, delays, curves, bound, bound_err, fit)
