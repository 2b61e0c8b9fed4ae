"""Unweighted nonlinear least squares with Jacobian-based standard errors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares


class FitError(RuntimeError):
    """Raised when a fit does not converge. ``diagnostics`` holds raw data."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class FitResult:
    names: tuple
    values: np.ndarray
    covariance: np.ndarray
    ssr: float
    dof: int
    nfev: int
    message: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def err(self, name: str) -> float:
        return float(self.stderr[self.names.index(name)])

    def as_dict(self) -> dict:
        return {n: {"value": float(v), "stderr": float(e)} for n, v, e in zip(self.names, self.values, self.stderr)}


def fit_least_squares(
    residuals: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    names: Sequence[str],
    bounds=(-np.inf, np.inf),
    x_scale="jac",
) -> FitResult:
    """Minimise ``sum(residuals(x)**2)`` with a finite-difference Jacobian.

    The covariance is ``s^2 pinv(J^T J)`` with ``s^2 = SSR / (n - k)``.
    """
    x0 = np.asarray(x0, dtype=float)
    try:
        res = least_squares(
            residuals, x0, jac="2-point", bounds=bounds, method="trf", x_scale=x_scale,
            xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=20000,
        )
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise FitError(f"least-squares solver failed: {exc}", {"x0": x0.tolist()}) from exc
    if res.status <= 0 or not np.all(np.isfinite(res.x)):
        raise FitError(f"fit did not converge: {res.message}", {"x0": x0.tolist(), "x": res.x.tolist()})
    n, k = res.fun.size, x0.size
    ssr = float(np.dot(res.fun, res.fun))
    dof = max(n - k, 0)
    s2 = ssr / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.pinv(res.jac.T @ res.jac)
    return FitResult(tuple(names), res.x.copy(), cov, ssr, dof, int(res.nfev), str(res.message))


def _means_by_x(x: np.ndarray, y: np.ndarray):
    xs = np.unique(x)
    return xs, np.array([y[x == v].mean() for v in xs])


def _two_point_rate(xs: np.ndarray, d: np.ndarray) -> float:
    """Decay base from two points of a positive, decaying sequence ``d``."""
    if d[0] <= 0:
        return 1.0
    later = [j for j in range(1, len(xs)) if 0 < d[j] <= 0.5 * d[0]]
    if later:
        j = later[0]
    else:
        positive = [j for j in range(1, len(xs)) if d[j] > 0]
        if not positive:
            return 1.0
        j = positive[-1]
    rate = (d[j] / d[0]) ** (1.0 / (xs[j] - xs[0]))
    return float(np.clip(rate, 1e-6, 1.0))


def leakage_model(m, a, b, lam):
    return 1.0 - a - b * np.power(lam, m)


def fit_leakage_decay(lengths, p2) -> FitResult:
    """Fit ``p2(m) = 1 - A - B lam**m`` with ``lam`` in (0, 1] and ``A`` in [0, 1]."""
    m = np.asarray(lengths, dtype=float)
    y = np.asarray(p2, dtype=float)
    xs, ybar = _means_by_x(m, y)
    a0 = float(np.clip(1.0 - ybar[-1], 0.0, 1.0))
    d = (1.0 - a0) - ybar
    lam0 = _two_point_rate(xs, d)
    b0 = float(d[0] / lam0 ** xs[0]) if lam0 < 1.0 else 0.0
    return fit_least_squares(
        lambda p: leakage_model(m, *p) - y,
        [a0, b0, lam0],
        ("A", "B", "lambda"),
        bounds=([0.0, -np.inf, 1e-12], [1.0, np.inf, 1.0]),
    )


def rb_model(m, a, b, alpha):
    return a + b * np.power(alpha, m)


def fit_rb_decay(lengths, p0) -> FitResult:
    """Fit ``p0(m) = A0 + B0 alpha**m`` with ``alpha`` in (0, 1]."""
    m = np.asarray(lengths, dtype=float)
    y = np.asarray(p0, dtype=float)
    xs, ybar = _means_by_x(m, y)
    a0 = float(ybar[-1])
    d = ybar - a0
    alpha0 = _two_point_rate(xs, d)
    b0 = float(d[0] / alpha0 ** xs[0]) if alpha0 < 1.0 else 0.0
    if alpha0 >= 1.0:
        a0 = float(ybar.mean())
    return fit_least_squares(
        lambda p: rb_model(m, *p) - y,
        [a0, b0, alpha0],
        ("A0", "B0", "alpha"),
        bounds=([-np.inf, -np.inf, 1e-12], [np.inf, np.inf, 1.0]),
    )
