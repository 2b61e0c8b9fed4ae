"""Readout error mitigation for a single qutrit.

``lambda_[i, j]`` is the probability of observing outcome ``i`` when basis
state ``|j>`` was prepared. Mitigation solves ``lambda_ @ v = u`` in the
least-squares sense (a pseudo-inverse when there are four MCMD outcomes)
and projects ``v`` onto the probability simplex in the L2 norm.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .measurement import MCMD_LABELS, ShotCounts, TERNARY_LABELS, mcmd_probabilities_noisy

MAX_COND = 1e10
SUM_WINDOW = 0.5


class RankDeficientError(ValueError):
    pass


class QuasiProbabilityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AssignmentMatrix:
    matrix: np.ndarray
    row_labels: tuple = MCMD_LABELS

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[1] != 3:
            raise ValueError(f"assignment matrix must be (n_outcomes, 3), got {m.shape}")
        if len(self.row_labels) != m.shape[0]:
            raise ValueError("one row label per observed outcome")
        if np.any(m < -1e-12) or np.any(m > 1 + 1e-12):
            raise ValueError("assignment matrix entries must be probabilities")
        if np.max(np.abs(m.sum(axis=0) - 1.0)) > 1e-9:
            raise ValueError("assignment matrix columns must sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "row_labels", tuple(self.row_labels))

    @property
    def shape(self) -> tuple:
        return self.matrix.shape

    def to_json(self) -> str:
        rows, cols = self.matrix.shape
        return json.dumps(
            {
                "rows": rows,
                "cols": cols,
                "row_labels": list(self.row_labels),
                "data": [[float(f"{x:.12g}") for x in row] for row in self.matrix],
            },
            sort_keys=True,
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "AssignmentMatrix":
        d = json.loads(text)
        data = np.asarray(d["data"], dtype=float)
        if data.shape != (d["rows"], d["cols"]):
            raise ValueError(f"data shape {data.shape} disagrees with header ({d['rows']}, {d['cols']})")
        return cls(data, tuple(d["row_labels"]))


def ideal_assignment(kind: str = "mcmd") -> AssignmentMatrix:
    if kind == "mcmd":
        return AssignmentMatrix(np.array([[0, 0, 0], [0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=float))
    if kind == "ternary":
        return AssignmentMatrix(np.eye(3), TERNARY_LABELS)
    raise ValueError(f"unknown readout kind {kind!r}")


def noisy_mcmd_assignment(noise) -> AssignmentMatrix:
    """Exact 4x3 matrix of the noisy MCMD readout."""
    cols = [mcmd_probabilities_noisy(np.eye(3)[j], noise) for j in range(3)]
    return AssignmentMatrix(np.column_stack(cols))


def estimate_assignment_matrix(calibration: Mapping[int, ShotCounts], labels=MCMD_LABELS) -> AssignmentMatrix:
    """Column ``j`` holds the outcome frequencies observed after preparing ``|j>``."""
    missing = [j for j in range(3) if j not in calibration]
    if missing:
        raise ValueError(f"calibration counts missing for basis states {missing}")
    cols = []
    for j in range(3):
        counts = calibration[j]
        if counts.shots < 1:
            raise ValueError(f"no calibration shots for |{j}>")
        cols.append(counts.frequencies(labels))
    return AssignmentMatrix(np.column_stack(cols), tuple(labels))


def invert_assignment(lambda_: AssignmentMatrix, observed) -> np.ndarray:
    """Quasi-probability ``v`` minimising ``|lambda_ v - u|``."""
    m = lambda_.matrix
    u = np.asarray(observed, dtype=float).reshape(-1)
    if u.size != m.shape[0]:
        raise ValueError(f"observed vector has {u.size} entries, expected {m.shape[0]}")
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond >= MAX_COND:
        raise RankDeficientError(f"assignment matrix is rank deficient (condition number {cond:.3g})")
    v, *_ = np.linalg.lstsq(m, u, rcond=None)
    total = v.sum()
    if not np.all(np.isfinite(v)):
        raise ValueError("quasi-probability is not finite")
    if abs(total - 1.0) > SUM_WINDOW:
        warnings.warn(
            f"quasi-probability sums to {total:.4g}; assignment matrix and observation look inconsistent",
            QuasiProbabilityWarning,
            stacklevel=2,
        )
    return v


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project a non-finite vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def mitigate(lambda_: AssignmentMatrix, observed) -> np.ndarray:
    return project_to_simplex(invert_assignment(lambda_, observed))


def hellinger(u, v, tol: float = 1e-6) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    for p in (u, v):
        if np.any(p < -tol) or abs(p.sum() - 1.0) > tol:
            raise ValueError(f"Hellinger distance needs distributions on the simplex, got {p!r}")
    d = np.sqrt(np.clip(u, 0, None)) - np.sqrt(np.clip(v, 0, None))
    return float(np.sqrt(np.dot(d, d)))
