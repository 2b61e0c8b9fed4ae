"""Single-shot IQ records and the two discriminator families.

IQ clouds are modelled as one Gaussian blob per qutrit level. The ternary
discriminator is quadratic discriminant analysis; the binary one is a
threshold along the axis joining the |0> and |1> cloud centres, which is
what a qubit-calibrated hardware discriminator does.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import kernels
from .measurement import ShotCounts, TERNARY_LABELS
from .rng import as_rng

MAX_COND = 1e12


class QDATrainingError(ValueError):
    pass


@dataclass(frozen=True)
class BlobModel:
    """Per-level IQ cloud centre ``means[s]`` and covariance ``covs[s]``."""

    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self):
        means = np.array(self.means, dtype=float).reshape(-1, 2)
        covs = np.array(self.covs, dtype=float).reshape(-1, 2, 2)
        if means.shape[0] != covs.shape[0]:
            raise ValueError("need one covariance per mean")
        for c in covs:
            if not np.allclose(c, c.T) or np.any(np.linalg.eigvalsh(c) <= 0):
                raise ValueError("blob covariances must be symmetric positive definite")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)

    @classmethod
    def from_dict(cls, d: Mapping) -> "BlobModel":
        means = np.asarray(d["means"], dtype=float)
        if "covariances" in d:
            covs = d["covariances"]
        else:
            sigma = float(d.get("sigma", 1.0))
            covs = np.repeat(np.eye(2)[None] * sigma**2, len(means), axis=0)
        return cls(means, covs)

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "covariances": self.covs.tolist()}


def default_blob_model() -> BlobModel:
    """Synthetic geometry: |0> well separated, |1> and |2> overlapping."""
    return BlobModel([[0.0, 0.0], [10.0, 0.0], [13.0, 2.0]], np.repeat(np.eye(2)[None], 3, axis=0))


def synthesize_shots(model: BlobModel, true_state: int, shots: int, seed) -> np.ndarray:
    """``shots`` IQ points, shape (shots, 2), drawn from one blob."""
    chol = np.linalg.cholesky(model.covs[true_state])
    z = as_rng(seed).standard_normal((shots, 2))
    return model.means[true_state] + z @ chol.T


def synthesize_labeled(model: BlobModel, shots_per_state: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Balanced calibration set: ``shots_per_state`` points for every level."""
    rng = as_rng(seed)
    points, labels = [], []
    for s in range(model.means.shape[0]):
        points.append(synthesize_shots(model, s, shots_per_state, rng))
        labels.append(np.full(shots_per_state, s))
    return np.concatenate(points), np.concatenate(labels)


@dataclass(frozen=True)
class QDAModel:
    means: np.ndarray
    covs: np.ndarray
    log_priors: np.ndarray

    def __post_init__(self):
        covs = np.asarray(self.covs, dtype=float)
        for c in covs:
            if np.linalg.cond(c) >= MAX_COND:
                raise QDATrainingError("class covariance is (near) singular")
        inv = np.linalg.inv(covs)
        _, logdet = np.linalg.slogdet(covs)
        object.__setattr__(self, "_inv_covs", np.ascontiguousarray(inv))
        object.__setattr__(self, "_offsets", np.asarray(self.log_priors) - 0.5 * logdet)

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    def log_likelihoods(self, points) -> np.ndarray:
        """Class scores up to a shared constant, shape (n, n_classes)."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        d = points[:, None, :] - self.means[None]
        quad = np.einsum("nci,cij,ncj->nc", d, self._inv_covs, d)
        return self._offsets[None] - 0.5 * quad

    def classify(self, points) -> np.ndarray:
        return kernels.qda_classify(points, self.means, self._inv_covs, self._offsets)


def train_qda(points, labels, priors: str = "uniform") -> QDAModel:
    """Fit per-class Gaussians (maximum likelihood covariance).

    ``priors`` is ``"uniform"`` or ``"empirical"`` (class frequencies).
    Classes are the integers ``0 .. max(labels)``.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    labels = np.asarray(labels, dtype=int)
    if labels.size == 0:
        raise QDATrainingError("no training data")
    n_classes = int(labels.max()) + 1
    means, covs, counts = [], [], []
    for c in range(n_classes):
        x = points[labels == c]
        if len(x) < 3:
            raise QDATrainingError(f"class {c} has {len(x)} points; need at least 3")
        mu = x.mean(axis=0)
        d = x - mu
        cov = d.T @ d / len(x)
        if np.linalg.cond(cov) >= MAX_COND:
            raise QDATrainingError(
                f"class {c} covariance is singular (condition number {np.linalg.cond(cov):.3g})"
            )
        means.append(mu)
        covs.append(cov)
        counts.append(len(x))
    if priors == "uniform":
        log_priors = np.full(n_classes, -np.log(n_classes))
    elif priors == "empirical":
        counts = np.asarray(counts, dtype=float)
        log_priors = np.log(counts / counts.sum())
    else:
        raise ValueError(f"unknown prior mode {priors!r}")
    return QDAModel(np.array(means), np.array(covs), log_priors)


def classify_qda(model: QDAModel, point) -> int:
    return int(model.classify(np.asarray(point, dtype=float).reshape(1, 2))[0])


def ternary_counts(model: QDAModel, points) -> ShotCounts:
    labels = model.classify(points)
    counts = np.bincount(labels, minlength=3)[:3]
    return ShotCounts.from_array(TERNARY_LABELS, counts)


@dataclass(frozen=True)
class BinaryThreshold:
    axis: np.ndarray
    threshold: float
    orientation: int = 1

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(2)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise ValueError("threshold axis must be a unit vector")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        object.__setattr__(self, "axis", axis)

    def classify(self, points) -> np.ndarray:
        proj = np.asarray(points, dtype=float).reshape(-1, 2) @ self.axis
        # A point exactly on the threshold reads 0.
        return (self.orientation * (proj - self.threshold) > 0).astype(np.int64)


def train_binary_threshold(points, labels) -> BinaryThreshold:
    """Midpoint threshold on the axis from the class-0 mean to the class-1 mean."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    labels = np.asarray(labels, dtype=int)
    x0, x1 = points[labels == 0], points[labels == 1]
    if len(x0) == 0 or len(x1) == 0:
        raise ValueError("binary threshold needs points of both class 0 and class 1")
    mu0, mu1 = x0.mean(axis=0), x1.mean(axis=0)
    diff = mu1 - mu0
    dist = np.linalg.norm(diff)
    if dist == 0.0 or dist < 1e-12 * max(np.linalg.norm(mu0), 1.0):
        raise ValueError("class means coincide; no readout axis")
    axis = diff / dist
    axis = axis / np.linalg.norm(axis)
    return BinaryThreshold(axis, float(0.5 * (mu0 + mu1) @ axis), 1)


def classify_binary(th: BinaryThreshold, point) -> int:
    return int(th.classify(point)[0])


# Shot-record files -----------------------------------------------------------

class ShotFileError(ValueError):
    pass


def read_shots_csv(path, require_labels: bool = False) -> tuple[np.ndarray, np.ndarray | None]:
    """Read ``i,q[,label]`` records. Errors name the offending line."""
    points, labels = [], []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ShotFileError(f"{path}: line 1: missing header row") from None
        if header[:2] != ["i", "q"] or header[2:] not in ([], ["label"]):
            raise ShotFileError(f"{path}: line 1: header must be 'i,q' or 'i,q,label', got {header}")
        has_label = len(header) == 3
        if require_labels and not has_label:
            raise ShotFileError(f"{path}: line 1: a 'label' column is required")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ShotFileError(f"{path}: line {line}: expected {len(header)} fields, got {len(row)}")
            try:
                i, q = float(row[0]), float(row[1])
                if has_label:
                    labels.append(int(row[2]))
            except ValueError:
                raise ShotFileError(f"{path}: line {line}: malformed value in {row}") from None
            if not (np.isfinite(i) and np.isfinite(q)):
                raise ShotFileError(f"{path}: line {line}: non-finite IQ value")
            points.append((i, q))
    pts = np.array(points, dtype=float).reshape(-1, 2)
    return pts, (np.array(labels, dtype=int) if has_label else None)


def write_shots_csv(path, points, labels=None) -> None:
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["i", "q", "label"] if labels is not None else ["i", "q"])
        for n, (i, q) in enumerate(points):
            row = [f"{i:.12g}", f"{q:.12g}"]
            if labels is not None:
                row.append(int(labels[n]))
            w.writerow(row)
