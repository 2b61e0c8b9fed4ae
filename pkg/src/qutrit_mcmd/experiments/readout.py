"""Readout chains shared by the experiments.

A readout turns true populations into outcome counts, builds its
assignment matrix from basis-state calibration shots, and reports raw
(unmitigated) and mitigated population estimates.
"""
from __future__ import annotations

import numpy as np

from ..iq import BlobModel, QDAModel, synthesize_labeled, synthesize_shots, train_qda
from ..measurement import (
    MCMD_LABELS,
    TERNARY_LABELS,
    MeasurementNoise,
    ShotCounts,
    mcmd_probabilities_noisy,
    sample,
)
from ..rem import AssignmentMatrix, estimate_assignment_matrix, mitigate


class MCMDReadout:
    kind = "mcmd"
    labels = MCMD_LABELS

    def __init__(self, noise: MeasurementNoise):
        self.noise = noise

    def outcome_probabilities(self, pops) -> np.ndarray:
        return mcmd_probabilities_noisy(pops, self.noise)

    def measure(self, pops, shots: int, rng) -> ShotCounts:
        return sample(self.outcome_probabilities(pops), shots, rng, self.labels)

    def exact_assignment(self) -> AssignmentMatrix:
        return AssignmentMatrix(np.column_stack([self.outcome_probabilities(np.eye(3)[j]) for j in range(3)]))

    def calibrate(self, shots: int, rng) -> AssignmentMatrix:
        cal = {j: self.measure(np.eye(3)[j], shots, rng) for j in range(3)}
        return estimate_assignment_matrix(cal, self.labels)

    @staticmethod
    def raw_estimate(freqs) -> np.ndarray:
        """Populations read straight off 10/01/11; ``00`` shots are discarded."""
        p00, p01, p10, p11 = freqs
        kept = p01 + p10 + p11
        if kept <= 0:
            return np.full(3, 1 / 3)
        return np.array([p10, p01, p11]) / kept

    def measure_mitigated(self, pops, lam: AssignmentMatrix, shots: int | None, rng) -> np.ndarray:
        if shots is None:
            freqs = self.outcome_probabilities(pops)
        else:
            freqs = self.measure(pops, shots, rng).frequencies(self.labels)
        return mitigate(lam, freqs)


class QDAReadout:
    """Ternary IQ readout: Gaussian blobs classified by a trained QDA model.

    Transitions in ``noise`` act on the state before its IQ point is drawn;
    ``x01_error`` and ``binary_confusion`` play no role here.
    """

    kind = "qda"
    labels = TERNARY_LABELS

    def __init__(self, blob: BlobModel, noise: MeasurementNoise, training_shots: int, rng):
        self.blob = blob
        self.noise = noise
        points, labels = synthesize_labeled(blob, training_shots, rng)
        self.model: QDAModel = train_qda(points, labels)

    def measure(self, pops, shots: int, rng) -> ShotCounts:
        during = np.asarray(pops, dtype=float) @ self.noise.transition_matrix()
        true_counts = sample(np.clip(during, 0, None) / during.sum(), shots, rng).counts
        tally = np.zeros(3, dtype=np.int64)
        for s, label in enumerate(TERNARY_LABELS):
            n = true_counts[label]
            if n:
                pts = synthesize_shots(self.blob, s, n, rng)
                tally += np.bincount(self.model.classify(pts), minlength=3)[:3]
        return ShotCounts.from_array(self.labels, tally)

    def calibrate(self, shots: int, rng) -> AssignmentMatrix:
        cal = {j: self.measure(np.eye(3)[j], shots, rng) for j in range(3)}
        return estimate_assignment_matrix(cal, self.labels)

    @staticmethod
    def raw_estimate(freqs) -> np.ndarray:
        return np.asarray(freqs, dtype=float)
