"""Qutrit states, gates, channels and the population-preparation circuit.

Basis ordering is (|0>, |1>, |2>) throughout. Density matrices are
vectorised row-major, so ``vec(A @ rho @ B) = kron(A, B.T) @ vec(rho)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STATE_TOL = 1e-12
UNITARY_TOL = 1e-10
PSD_TOL = -1e-10
SIMPLEX_TOL = 1e-9

PROJ01 = np.diag([1.0, 1.0, 0.0]).astype(complex)
PROJ2 = np.diag([0.0, 0.0, 1.0]).astype(complex)


@dataclass(frozen=True)
class Amplitudes:
    """Pure qutrit state as a normalised complex 3-vector."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex).reshape(3)
        norm = float(np.sum(np.abs(a) ** 2))
        if abs(norm - 1.0) > STATE_TOL:
            raise ValueError(f"amplitudes not normalised: sum |a_i|^2 = {norm!r}")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @classmethod
    def basis(cls, k: int) -> "Amplitudes":
        a = np.zeros(3, dtype=complex)
        a[k] = 1.0
        return cls(a)

    def to_density(self) -> "DensityMatrix3":
        return DensityMatrix3(np.outer(self.a, self.a.conj()))


@dataclass(frozen=True)
class DensityMatrix3:
    """Hermitian, positive semidefinite, unit-trace 3x3 matrix."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex).reshape(3, 3)
        if np.max(np.abs(rho - rho.conj().T)) > STATE_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > STATE_TOL:
            raise ValueError(f"density matrix trace {tr!r} != 1")
        if np.min(np.linalg.eigvalsh(rho)) < PSD_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def basis(cls, k: int) -> "DensityMatrix3":
        rho = np.zeros((3, 3), dtype=complex)
        rho[k, k] = 1.0
        return cls(rho)

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix3":
        return cls(np.eye(3, dtype=complex) / 3)

    @classmethod
    def diagonal(cls, probs) -> "DensityMatrix3":
        return cls(np.diag(np.asarray(probs, dtype=float)).astype(complex))

    def vec(self) -> np.ndarray:
        return self.rho.reshape(9).copy()


@dataclass(frozen=True)
class Gate3:
    """Qutrit unitary."""

    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=complex).reshape(3, 3)
        if np.max(np.abs(u @ u.conj().T - np.eye(3))) > UNITARY_TOL:
            raise ValueError("gate matrix is not unitary")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def __matmul__(self, other: "Gate3") -> "Gate3":
        return Gate3(self.u @ other.u)

    def superop(self) -> np.ndarray:
        return np.kron(self.u, self.u.conj())


@dataclass(frozen=True)
class Channel3:
    """CPTP map in Kraus form."""

    kraus: tuple = field(default_factory=tuple)

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex).reshape(3, 3) for k in self.kraus)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        completeness = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(completeness - np.eye(3))) > UNITARY_TOL:
            raise ValueError("Kraus operators do not satisfy completeness")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)

    @classmethod
    def identity(cls) -> "Channel3":
        return cls((np.eye(3),))

    @classmethod
    def from_gate(cls, gate: Gate3) -> "Channel3":
        return cls((gate.u,))

    def superop(self) -> np.ndarray:
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    def compose(self, after: "Channel3") -> "Channel3":
        """Channel applying ``self`` first and then ``after``."""
        return Channel3(tuple(b @ a for b in after.kraus for a in self.kraus))


@dataclass(frozen=True)
class PrepAngles:
    theta1: float
    theta2: float
    theta3: float
    theta4: float


def gate_x01(phi: float = 0.0) -> Gate3:
    return Gate3([[0, 1, 0], [1, 0, 0], [0, 0, np.exp(1j * phi)]])


def gate_x12(phi: float = 0.0) -> Gate3:
    return Gate3([[np.exp(1j * phi), 0, 0], [0, 0, 1], [0, 1, 0]])


def gate_sx01() -> Gate3:
    """Half-pi X rotation on the 01 subspace; SX @ SX equals X01 exactly."""
    u = np.eye(3, dtype=complex)
    u[:2, :2] = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
    return Gate3(u)


def gate_rz01(theta: float) -> Gate3:
    """Virtual Z: phase ``exp(i theta)`` on |1> only."""
    return Gate3(np.diag([1.0, np.exp(1j * theta), 1.0]))


def gate_rx12(angle: float) -> Gate3:
    """Rotation ``exp(-i angle/2 (|1><2| + |2><1|))``; identity on |0>."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return Gate3([[1, 0, 0], [0, c, -1j * s], [0, -1j * s, c]])


def check_simplex(p, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Return ``p`` as a float array, raising if it is off the simplex."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or not np.all(np.isfinite(p)):
        raise ValueError(f"not a probability vector: {p!r}")
    if np.any(p < -tol) or np.any(p > 1 + tol) or abs(p.sum() - 1.0) > tol:
        raise ValueError(f"distribution off the probability simplex: {p!r}")
    return p


def _split_angle(fraction: float) -> float:
    return 2.0 * np.arccos(np.sqrt(min(max(fraction, 0.0), 1.0))) + np.pi


def prep_angles(target) -> PrepAngles:
    """Z-rotation angles of the preparation circuit for populations ``target``."""
    p0, p1, p2 = check_simplex(target, 1e-9)
    s01 = p0 + p1
    if s01 <= 0.0:
        theta4 = np.pi
    else:
        theta4 = _split_angle(p0 / s01)
    return PrepAngles(np.pi / 2, _split_angle(s01), 5 * np.pi / 2, theta4)


def prep_circuit(angles: PrepAngles) -> list[Gate3]:
    """Gates of the preparation circuit in time order.

    Two SX-RZ-SX sandwiches in the 01 subspace, separated by a full X12
    which parks the first sandwich's |1> population in |2>. The fixed
    angles theta1 and theta3 only set relative phases.
    """
    sx = gate_sx01()
    return [
        gate_rz01(angles.theta1),
        sx,
        gate_rz01(angles.theta2),
        sx,
        gate_x12(),
        gate_rz01(angles.theta3),
        sx,
        gate_rz01(angles.theta4),
        sx,
    ]


def prepare_state(target) -> Amplitudes:
    angles = prep_angles(target)
    psi = Amplitudes.basis(0).a
    for g in prep_circuit(angles):
        psi = g.u @ psi
    # Renormalise away the ~1e-16 drift of nine matrix products.
    return Amplitudes(psi / np.linalg.norm(psi))


def populations(state) -> np.ndarray:
    if isinstance(state, Amplitudes):
        p = np.abs(state.a) ** 2
    elif isinstance(state, DensityMatrix3):
        p = np.diag(state.rho).real.copy()
    else:
        raise TypeError(f"unsupported state type {type(state).__name__}")
    return p


def apply(state, op):
    """Apply a gate or channel. Channels turn pure states into density matrices."""
    if isinstance(op, Gate3):
        if isinstance(state, Amplitudes):
            return Amplitudes(op.u @ state.a)
        if isinstance(state, DensityMatrix3):
            return DensityMatrix3(_hermitize(op.u @ state.rho @ op.u.conj().T))
    elif isinstance(op, Channel3):
        if isinstance(state, Amplitudes):
            state = state.to_density()
        if isinstance(state, DensityMatrix3):
            rho = sum(k @ state.rho @ k.conj().T for k in op.kraus)
            return DensityMatrix3(_hermitize(rho))
    else:
        raise TypeError(f"cannot apply {type(op).__name__}")
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _hermitize(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


# Noise channels ------------------------------------------------------------

def transition_channel(transfer: np.ndarray) -> Channel3:
    """Incoherent population transfer with matching coherence damping.

    ``transfer[i, j]`` is the probability of |i> ending in |j>; only
    downward (j < i) transfers are allowed. Coherences between |i> and |j>
    shrink by ``sqrt(transfer[i, i] * transfer[j, j])``.
    """
    transfer = np.asarray(transfer, dtype=float)
    if np.any(np.triu(transfer, 1) > 0):
        raise ValueError("transition channel only supports downward transfer")
    if np.max(np.abs(transfer.sum(axis=1) - 1.0)) > 1e-9:
        raise ValueError("rows of the transfer matrix must sum to 1")
    kraus = [np.diag(np.sqrt(np.clip(np.diag(transfer), 0, None)))]
    for i in range(3):
        for j in range(i):
            if transfer[i, j] > 0:
                k = np.zeros((3, 3))
                k[j, i] = np.sqrt(transfer[i, j])
                kraus.append(k)
    return Channel3(tuple(kraus))


def depolarizing01_channel(p: float) -> Channel3:
    """Depolarising channel acting on the 01 block only."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("depolarising probability must be in [0, 1]")
    paulis = [
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    ]
    k0 = np.sqrt(1 - 3 * p / 4) * PROJ01 + PROJ2
    kraus = [k0]
    if p > 0:
        for s in paulis:
            k = np.zeros((3, 3), dtype=complex)
            k[:2, :2] = np.sqrt(p / 4) * s
            kraus.append(k)
    return Channel3(tuple(kraus))
