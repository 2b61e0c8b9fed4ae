"""Mid-circuit-measurement discrimination and the two-circuit alternative.

MCMD outcome vectors are ordered ``(p00, p01, p10, p11)`` where each label
is the bit string ``beta alpha``: second measurement first, then the
first measurement. Ideally ``10 -> |0>``, ``01 -> |1>``, ``11 -> |2>`` and
``00`` never occurs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from . import kernels
from .qutrit import check_simplex
from .rng import as_rng

MCMD_LABELS = ("00", "01", "10", "11")
TERNARY_LABELS = ("0", "1", "2")
BINARY_LABELS = ("0", "1")

# Binary POVM: |0> reads 0, both |1> and |2> read 1.
BINARY_OF_STATE = np.array([0, 1, 1])


@dataclass(frozen=True)
class MeasurementNoise:
    """Phenomenological readout noise.

    ``t01`` heating and ``t10``, ``t21``, ``t20`` decays happen once per
    MCMD shot, during the first measurement and after its outcome is
    fixed. ``x01_error`` is the probability that the interleaved X01 does
    nothing. ``binary_confusion[observed, true]`` applies to every binary
    readout.
    """

    t01: float = 0.0
    t10: float = 0.0
    t21: float = 0.0
    t20: float = 0.0
    x01_error: float = 0.0
    binary_confusion: np.ndarray = field(default_factory=lambda: np.eye(2))

    def __post_init__(self):
        for name in ("t01", "t10", "t21", "t20", "x01_error"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be a probability, got {v}")
            object.__setattr__(self, name, v)
        if self.t21 + self.t20 > 1.0 + 1e-12:
            raise ValueError("t21 + t20 must not exceed 1")
        conf = np.array(self.binary_confusion, dtype=float).reshape(2, 2)
        if np.any(conf < 0) or np.any(conf > 1):
            raise ValueError("binary_confusion entries must be probabilities")
        if np.max(np.abs(conf.sum(axis=0) - 1.0)) > 1e-9:
            raise ValueError("binary_confusion columns must sum to 1")
        conf.setflags(write=False)
        object.__setattr__(self, "binary_confusion", conf)

    @classmethod
    def from_dict(cls, d: Mapping) -> "MeasurementNoise":
        known = {"t01", "t10", "t21", "t20", "x01_error", "binary_confusion"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown noise keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "t01": self.t01,
            "t10": self.t10,
            "t21": self.t21,
            "t20": self.t20,
            "x01_error": self.x01_error,
            "binary_confusion": self.binary_confusion.tolist(),
        }

    def transition_matrix(self) -> np.ndarray:
        """``T[i, j]``: probability that |i> becomes |j> during readout."""
        return np.array(
            [
                [1 - self.t01, self.t01, 0.0],
                [self.t10, 1 - self.t10, 0.0],
                [self.t20, self.t21, 1 - self.t21 - self.t20],
            ]
        )

    def x01_matrix(self) -> np.ndarray:
        e = self.x01_error
        return np.array([[e, 1 - e, 0.0], [1 - e, e, 0.0], [0.0, 0.0, 1.0]])

    def is_ideal(self) -> bool:
        return (
            self.t01 == self.t10 == self.t21 == self.t20 == self.x01_error == 0.0
            and np.array_equal(self.binary_confusion, np.eye(2))
        )


@dataclass(frozen=True)
class ShotCounts:
    counts: dict
    shots: int

    def __post_init__(self):
        if any(int(c) < 0 for c in self.counts.values()):
            raise ValueError("counts must be nonnegative")
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to the shot total")

    @classmethod
    def from_array(cls, labels, counts) -> "ShotCounts":
        counts = [int(c) for c in counts]
        return cls(dict(zip(labels, counts)), sum(counts))

    def frequencies(self, labels) -> np.ndarray:
        if self.shots == 0:
            return np.zeros(len(labels))
        return np.array([self.counts.get(k, 0) for k in labels], dtype=float) / self.shots


def mcmd_probabilities(state) -> np.ndarray:
    p0, p1, p2 = check_simplex(state)
    return np.array([0.0, p1, p0, p2])


def mcmd_probabilities_noisy(state, noise: MeasurementNoise) -> np.ndarray:
    p = check_simplex(state)
    conf = noise.binary_confusion
    # first[s, alpha]: the first readout only sees the pre-transition state.
    first = conf[:, BINARY_OF_STATE].T
    # after[s, s'']: transition, then the (possibly failed) X01.
    after = noise.transition_matrix() @ noise.x01_matrix()
    # second[s, beta]
    second = after @ conf[:, BINARY_OF_STATE].T
    joint = np.einsum("s,sa,sb->ba", p, first, second)
    return joint.reshape(4)


def independent_probabilities(state) -> tuple[np.ndarray, np.ndarray]:
    """Outcome distributions of the circuits without and with X01."""
    p0, p1, p2 = check_simplex(state)
    return np.array([p0, p1 + p2]), np.array([p1, p0 + p2])


def estimate_p2_independent(p_alpha1: float, p_beta1: float) -> float:
    """|2> population from the two-circuit protocol; may be negative."""
    return p_alpha1 + p_beta1 - 1.0


def _labels_for(k: int) -> tuple:
    return {2: BINARY_LABELS, 3: TERNARY_LABELS, 4: MCMD_LABELS}[k]


def _cdf(dist) -> np.ndarray:
    p = check_simplex(dist)
    cdf = np.cumsum(np.clip(p, 0.0, None))
    return cdf / cdf[-1]


def sample(dist, shots: int, seed, labels=None) -> ShotCounts:
    """Multinomial shot counts by inverse-CDF sampling."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    cdf = _cdf(dist)
    uniforms = as_rng(seed).random(shots)
    counts = kernels.inverse_cdf_counts(cdf, uniforms)
    return ShotCounts.from_array(labels or _labels_for(cdf.size), counts)


def sample_batch(dist, shots: int, reps: int, seed, chunk: int = 2000) -> np.ndarray:
    """``reps`` independent count vectors of ``shots`` each, shape (reps, k)."""
    if shots < 1 or reps < 1:
        raise ValueError("shots and reps must be >= 1")
    cdf = _cdf(dist)
    rng = as_rng(seed)
    out = np.empty((reps, cdf.size), dtype=np.int64)
    for start in range(0, reps, chunk):
        stop = min(start + chunk, reps)
        out[start:stop] = kernels.inverse_cdf_counts_batch(cdf, rng.random((stop - start, shots)))
    return out


def variance_mcm(state, shots: int) -> float:
    p2 = check_simplex(state)[2]
    return shots * p2 * (1 - p2)


def variance_im(state, shots: int) -> float:
    p0, p1, _ = check_simplex(state)
    return shots * (p0 * (1 - p0) + p1 * (1 - p1))


def variance_ratio(state) -> Optional[float]:
    """``V_MCM / V_IM``; ``None`` where ``V_IM`` vanishes."""
    p0, p1, p2 = check_simplex(state)
    # Written without 1 - p terms to avoid cancellation near the vertices.
    denom = p0 * (p1 + p2) + p1 * (p0 + p2)
    if denom <= 1e-15:
        return None
    return p2 * (p0 + p1) / denom
