"""The 24-element single-qubit Clifford group, acting on the 01 subspace.

The group is generated at import by closing {SX, RZ(pi/2)} under
multiplication. Elements are stored modulo global phase and indexed in
discovery order, so index 0 is the identity.
"""
from __future__ import annotations

import itertools

import numpy as np

from .rng import as_rng

_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
_S = np.diag([1.0, 1j])
_QUARTER = (0.0, np.pi / 2, np.pi, 3 * np.pi / 2)


def _canonical(u: np.ndarray) -> np.ndarray:
    """Fix the global phase: first entry of largest modulus made real positive."""
    flat = u.reshape(-1)
    k = int(np.argmax(np.abs(flat) > np.abs(flat).max() - 1e-9))
    return u * (abs(flat[k]) / flat[k])


def _key(u: np.ndarray) -> tuple:
    c = _canonical(u).reshape(-1)
    return tuple(np.round(np.concatenate([c.real, c.imag]), 8) + 0.0)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-9) -> bool:
    return bool(np.allclose(_canonical(a), _canonical(b), atol=atol))


def _rz(theta: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * theta)])


def _generate():
    elements = [np.eye(2, dtype=complex)]
    index = {_key(elements[0]): 0}
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for g in (_SX, _S):
                u = g @ elements[i]
                k = _key(u)
                if k not in index:
                    index[k] = len(elements)
                    elements.append(_canonical(u))
                    nxt.append(index[k])
        frontier = nxt
    n = len(elements)
    table = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            table[a, b] = index[_key(elements[a] @ elements[b])]
    inverse = np.array([int(np.nonzero(table[a] == 0)[0][0]) for a in range(n)])
    return elements, index, table, inverse


def _decompose(u: np.ndarray) -> tuple:
    """Angles (a, b, c) with ``u ~ RZ(a) SX RZ(b) SX RZ(c)``."""
    for a, b, c in itertools.product(_QUARTER, repeat=3):
        if equal_up_to_phase(_rz(a) @ _SX @ _rz(b) @ _SX @ _rz(c), u):
            return a, b, c
    raise RuntimeError("Clifford element has no quarter-turn Euler decomposition")


ELEMENTS, _INDEX, MULTIPLY, INVERSE = _generate()
EULER_ANGLES = [_decompose(u) for u in ELEMENTS]
N_CLIFFORDS = len(ELEMENTS)

if N_CLIFFORDS != 24:
    raise RuntimeError(f"Clifford closure produced {N_CLIFFORDS} elements")


def lookup(u: np.ndarray) -> int:
    return _INDEX[_key(np.asarray(u, dtype=complex))]


def compose(indices) -> int:
    """Index of the operator applying ``indices[0]`` first, then ``indices[1]`` ..."""
    acc = 0
    for k in indices:
        acc = int(MULTIPLY[k, acc])
    return acc


def clifford_sequence(m: int, seed) -> list[int]:
    """``m`` uniformly random Clifford indices followed by their inverse."""
    if m < 0:
        raise ValueError("sequence length must be >= 0")
    seq = [int(k) for k in as_rng(seed).integers(0, N_CLIFFORDS, size=m)]
    seq.append(int(INVERSE[compose(seq)]))
    return seq
