import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutrit_mcmd.qutrit import (
    Amplitudes,
    Channel3,
    DensityMatrix3,
    Gate3,
    apply,
    depolarizing01_channel,
    gate_rx12,
    gate_rz01,
    gate_sx01,
    gate_x01,
    gate_x12,
    populations,
    prep_angles,
    prep_circuit,
    prepare_state,
    transition_channel,
)

angles = st.floats(-20, 20, allow_nan=False)


def simplex_points(step=0.05):
    n = round(1 / step)
    for i in range(n + 1):
        for j in range(n + 1 - i):
            p1, p2 = i / n, j / n
            yield np.array([max(1 - p1 - p2, 0.0), p1, p2])


def _unitary_err(g):
    return np.max(np.abs(g.u @ g.u.conj().T - np.eye(3)))


def test_x01_flips_computational_states():
    assert np.allclose(populations(apply(Amplitudes.basis(1), gate_x01())), [1, 0, 0])
    assert np.allclose(populations(apply(Amplitudes.basis(2), gate_x01())), [0, 0, 1])


def test_x01_phase_keeps_modulus():
    g = gate_x01(np.pi / 3)
    assert _unitary_err(g) < 1e-10
    assert abs(abs(g.u[2, 2]) - 1) < 1e-15


def test_x12_swaps_12_subspace():
    assert np.allclose(populations(apply(Amplitudes.basis(1), gate_x12())), [0, 0, 1])
    assert np.allclose(populations(apply(Amplitudes.basis(0), gate_x12())), [1, 0, 0])


@given(angles, st.lists(st.floats(0, 1), min_size=3, max_size=3).filter(lambda x: sum(x) > 0.1))
def test_x12_squared_preserves_populations(phi, weights):
    p = np.array(weights) / sum(weights)
    psi = prepare_state(p)
    twice = gate_x12(phi) @ gate_x12(phi)
    assert np.max(np.abs(twice.u - np.diag(np.diag(twice.u)))) < 1e-15
    assert np.allclose(populations(apply(psi, twice)), p, atol=1e-12)


def test_sx_is_half_x():
    sx = gate_sx01()
    assert np.allclose(populations(apply(Amplitudes.basis(0), sx)), [0.5, 0.5, 0])
    assert np.allclose(populations(apply(apply(Amplitudes.basis(0), sx), sx)), [0, 1, 0])
    assert np.allclose((sx @ sx).u, gate_x01().u)


@given(angles)
def test_rz_leaves_populations(theta):
    rho = DensityMatrix3(np.full((3, 3), 1 / 3))
    assert np.allclose(populations(apply(rho, gate_rz01(theta))), [1 / 3] * 3)


def test_gate_constructors_are_unitary():
    rng = np.random.default_rng(7)
    for phi in rng.uniform(-10, 10, 1000):
        for g in (gate_x01(phi), gate_x12(phi), gate_rz01(phi), gate_rx12(phi), gate_sx01()):
            assert _unitary_err(g) < 1e-10


def test_non_unitary_rejected():
    with pytest.raises(ValueError):
        Gate3(np.diag([1, 1, 0.5]))


def test_prep_angles_vertices():
    a = prep_angles([0, 0, 1])
    assert a.theta4 == np.pi
    b = prep_angles([1, 0, 0])
    assert b.theta2 == pytest.approx(np.pi, abs=1e-15)
    assert b.theta4 == pytest.approx(np.pi, abs=1e-15)
    assert a.theta1 == np.pi / 2 and a.theta3 == 5 * np.pi / 2


def test_prep_angles_reject_off_simplex():
    with pytest.raises(ValueError):
        prep_angles([0.5, 0.5, 0.1])
    with pytest.raises(ValueError):
        prep_angles([1.2, -0.2, 0.0])


def _simulate_circuit(angles):
    # Independent statevector oracle: multiply the circuit out as one matrix.
    u = np.eye(3, dtype=complex)
    for g in prep_circuit(angles):
        u = g.u @ u
    return np.abs(u[:, 0]) ** 2


@pytest.mark.parametrize("target", [(0.25, 0.25, 0.5), (0.2, 0.3, 0.5), (1, 0, 0), (0, 0, 1), (0, 1, 0)])
def test_prepare_state_examples(target):
    assert np.max(np.abs(_simulate_circuit(prep_angles(target)) - target)) < 1e-10
    assert np.max(np.abs(populations(prepare_state(target)) - target)) < 1e-10


def test_prepare_state_on_grid():
    worst = max(np.max(np.abs(populations(prepare_state(p)) - p)) for p in simplex_points())
    assert worst < 1e-10


def test_populations_examples():
    assert np.allclose(populations(Amplitudes.basis(0)), [1, 0, 0])
    plus = Amplitudes(np.array([1, 1, 0]) / np.sqrt(2))
    assert np.allclose(populations(plus), [0.5, 0.5, 0])
    assert np.allclose(populations(DensityMatrix3.maximally_mixed()), [1 / 3] * 3)


def test_state_validation():
    with pytest.raises(ValueError):
        Amplitudes([1, 1, 0])
    with pytest.raises(ValueError):
        DensityMatrix3(np.diag([0.5, 0.6, -0.1]))
    with pytest.raises(ValueError):
        DensityMatrix3([[0.5, 0.1], [0.2, 0.5]] + [[0, 0]])


def test_identity_channel_and_relaxation():
    rho = DensityMatrix3.diagonal([0.2, 0.3, 0.5])
    assert np.allclose(apply(rho, Channel3.identity()).rho, rho.rho)
    full = transition_channel([[1, 0, 0], [1, 0, 0], [1, 0, 0]])
    assert np.allclose(populations(apply(DensityMatrix3.basis(2), full)), [1, 0, 0])


def test_x01_twice_restores():
    psi = prepare_state([0.2, 0.3, 0.5])
    twice = apply(apply(psi, gate_x01()), gate_x01())
    assert np.allclose(populations(twice), [0.2, 0.3, 0.5])


def test_channel_completeness_enforced():
    with pytest.raises(ValueError):
        Channel3((0.5 * np.eye(3),))


@settings(max_examples=50)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.5), st.floats(0, 0.5))
def test_channels_preserve_trace_and_hermiticity(p, t10, t20, t21):
    rng = np.random.default_rng(int(p * 1e6))
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = DensityMatrix3(x @ x.conj().T / np.trace(x @ x.conj().T).real)
    transfer = np.array([[1, 0, 0], [t10, 1 - t10, 0], [t20, t21, 1 - t20 - t21]])
    ch = depolarizing01_channel(p).compose(transition_channel(transfer))
    out = sum(k @ rho.rho @ k.conj().T for k in ch.kraus)
    assert abs(np.trace(out) - 1) < 1e-10
    assert np.max(np.abs(out - out.conj().T)) < 1e-10
    assert np.min(np.linalg.eigvalsh(out)) > -1e-10


def test_superop_matches_kraus():
    ch = depolarizing01_channel(0.1).compose(transition_channel([[1, 0, 0], [0.1, 0.9, 0], [0.05, 0.1, 0.85]]))
    rho = DensityMatrix3(np.array([[0.5, 0.2, 0.1j], [0.2, 0.3, 0], [-0.1j, 0, 0.2]]))
    direct = apply(rho, ch).rho
    via = (ch.superop() @ rho.vec()).reshape(3, 3)
    assert np.allclose(direct, via, atol=1e-14)
