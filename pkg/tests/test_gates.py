import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import embed, random_unitary
from pathswap import gates
from pathswap.gates import BeamSplitterParams, GateMatrix
from pathswap.svcore import LAYOUT, StateVector, UnitarityError, amplitude, apply_unitary, fidelity, tensor_product

H = 1 / np.sqrt(2)
ALPHA, BETA = 0.6, 0.8


def all_gates():
    return [
        gates.beam_splitter_bs1(BeamSplitterParams(ALPHA, BETA)),
        gates.beam_splitter_bs1(BeamSplitterParams(H, H)),
        gates.beam_splitter_bs1(BeamSplitterParams(1.0, 0.0)),
        gates.beam_splitter_bs2(),
        gates.spin_flipper("R"),
        gates.spin_flipper("T"),
        gates.cnot(),
        gates.sg_rotation(),
        gates.phase_s(),
        gates.pauli_z(),
        gates.pauli_x(),
        gates.pauli_z() @ gates.phase_s(),
    ]


@pytest.mark.parametrize("g", all_gates(), ids=lambda g: g.name)
def test_every_gate_is_unitary(g):
    err = np.abs(g.matrix @ g.matrix.conj().T - np.eye(g.dim)).max()
    assert err <= 1e-12


def test_gate_matrix_rejects_non_unitary():
    with pytest.raises(UnitarityError):
        GateMatrix("bad", [[1, 0], [0, 2]])


@pytest.mark.parametrize("a,b", [(-0.6, 0.8), (0.6, 0.6), (float("nan"), 1.0)])
def test_beam_splitter_params_validation(a, b):
    with pytest.raises(ValueError):
        BeamSplitterParams(a, b)


def test_beam_splitter_params_from_alpha():
    p = BeamSplitterParams.from_alpha(0.6)
    assert p.beta == pytest.approx(0.8, abs=1e-15)
    with pytest.raises(ValueError):
        BeamSplitterParams.from_alpha(1.2)


def test_bs1_fully_transmitting_is_identity():
    g = gates.beam_splitter_bs1(BeamSplitterParams(1.0, 0.0))
    np.testing.assert_array_equal(g.matrix, np.eye(2))


def test_bs1_on_incident_spin_up_particle():
    psi = StateVector.basis(p="T", s=0)
    out = apply_unitary(psi, gates.beam_splitter_bs1(BeamSplitterParams(ALPHA, BETA)), ["p"])
    assert amplitude(out, p="T", s=0) == pytest.approx(ALPHA, abs=1e-12)
    assert amplitude(out, p="R", s=0) == pytest.approx(1j * BETA, abs=1e-12)
    assert amplitude(out, p="T", s=1) == 0
    assert amplitude(out, p="R", s=1) == 0


def test_bs1_columns_orthonormal():
    m = gates.beam_splitter_bs1(BeamSplitterParams(ALPHA, BETA)).matrix
    assert np.vdot(m[:, 0], m[:, 1]) == pytest.approx(0, abs=1e-15)
    assert np.linalg.norm(m[:, 0]) == pytest.approx(1, abs=1e-15)
    assert np.linalg.norm(m[:, 1]) == pytest.approx(1, abs=1e-15)


def test_bs1_balanced_magnitudes():
    m = gates.beam_splitter_bs1(BeamSplitterParams(H, H)).matrix
    np.testing.assert_allclose(np.abs(m), H, atol=1e-15)


def test_bs1_requires_params():
    with pytest.raises(TypeError):
        gates.beam_splitter_bs1((0.6, 0.8))


def test_bs2_on_each_port():
    g = gates.beam_splitter_bs2()
    t = apply_unitary(StateVector.basis(p="T"), g, ["p"])
    r = apply_unitary(StateVector.basis(p="R"), g, ["p"])
    assert amplitude(t, p="T'") == pytest.approx(1j * H, abs=1e-15)
    assert amplitude(t, p="R'") == pytest.approx(H, abs=1e-15)
    assert amplitude(r, p="T'") == pytest.approx(H, abs=1e-15)
    assert amplitude(r, p="R'") == pytest.approx(1j * H, abs=1e-15)


def test_bs2_twice_swaps_ports():
    m = gates.beam_splitter_bs2().matrix
    # brute-force square: i * sigma_x
    sq = np.array([[sum(m[i, k] * m[k, j] for k in range(2)) for j in range(2)] for i in range(2)])
    np.testing.assert_allclose(sq, 1j * np.array([[0, 1], [1, 0]]), atol=1e-15)
    twice = apply_unitary(apply_unitary(StateVector.basis(p="T"), gates.beam_splitter_bs2(), ["p"]),
                          gates.beam_splitter_bs2(), ["p"])
    assert fidelity(twice, StateVector.basis(p="R")) == pytest.approx(1, abs=1e-12)
    assert fidelity(twice, StateVector.basis(p="T")) == pytest.approx(0, abs=1e-12)


def test_spin_flipper_reflected_channel_entangles():
    bs1 = apply_unitary(StateVector.basis(p="T", s=0), gates.beam_splitter_bs1(BeamSplitterParams(ALPHA, BETA)), ["p"])
    out = apply_unitary(bs1, gates.spin_flipper("R"), ["p", "s"])
    assert amplitude(out, p="T", s=0) == pytest.approx(ALPHA, abs=1e-12)
    assert amplitude(out, p="R", s=1) == pytest.approx(1j * BETA, abs=1e-12)
    assert abs(amplitude(out, p="T", s=1)) + abs(amplitude(out, p="R", s=0)) == 0


def test_spin_flipper_control_not_satisfied():
    psi = StateVector.basis(p="R", s=0)
    out = apply_unitary(psi, gates.spin_flipper("T"), ["p", "s"])
    np.testing.assert_array_equal(out.amps, psi.amps)


@pytest.mark.parametrize("channel", ["T", "R"])
def test_spin_flipper_is_involution(channel):
    m = gates.spin_flipper(channel).matrix
    np.testing.assert_allclose(m @ m, np.eye(4), atol=1e-15)


def test_spin_flipper_unknown_channel():
    with pytest.raises(ValueError):
        gates.spin_flipper("X")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["T", "R"]), st.sampled_from([["q2"], ["q3"], ["q2", "q3"], ["q3", "q2"]]))
def test_spin_flipper_commutes_with_ancilla_gates(seed, channel, targets):
    u = random_unitary(np.random.default_rng(seed), 2 ** len(targets))
    sf = embed(gates.spin_flipper(channel).matrix, ["p", "s"], list(LAYOUT))
    other = embed(u, targets, list(LAYOUT))
    np.testing.assert_allclose(sf @ other, other @ sf, atol=1e-12)


def test_cnot_truth_table():
    m = gates.cnot().matrix
    for c, t in itertools.product((0, 1), repeat=2):
        out = m @ np.eye(4)[2 * c + t]
        assert out[2 * c + (t ^ c)] == 1


def test_cnot_on_carrier_and_ancillas():
    carrier = StateVector(("p", "s"), [ALPHA, 0, 0, 1j * BETA])
    psi = tensor_product(tensor_product(carrier, StateVector.basis(q2=0)), StateVector.basis(q3=0))
    psi = apply_unitary(psi, gates.cnot(), ["s", "q2"])
    psi = apply_unitary(psi, gates.cnot(), ["s", "q3"])
    assert amplitude(psi, p="T", s=0, q2=0, q3=0) == pytest.approx(ALPHA, abs=1e-12)
    assert amplitude(psi, p="R", s=1, q2=1, q3=1) == pytest.approx(1j * BETA, abs=1e-12)
    assert np.count_nonzero(np.abs(psi.amps) > 1e-12) == 2


def test_sg_rotation_maps_up_to_plus():
    out = apply_unitary(StateVector.basis(s=0), gates.sg_rotation(), ["s"])
    np.testing.assert_allclose(out.amps, [H, H], atol=1e-15)
    out = apply_unitary(StateVector.basis(s=1), gates.sg_rotation(), ["s"])
    np.testing.assert_allclose(out.amps, [H, -H], atol=1e-15)


def test_sg_rotation_after_path_readout():
    psi = StateVector(("s", "q2", "q3"), [ALPHA, 0, 0, 0, 0, 0, 0, BETA])
    out = apply_unitary(psi, gates.sg_rotation(), ["s"])
    expected = H * np.array([ALPHA, 0, 0, BETA, ALPHA, 0, 0, -BETA])
    np.testing.assert_allclose(out.amps, expected, atol=1e-12)


@pytest.mark.parametrize("make", [gates.cnot, gates.sg_rotation, gates.pauli_x, gates.pauli_z])
def test_self_inverse(make):
    m = make().matrix
    np.testing.assert_allclose(m @ m, np.eye(len(m)), atol=1e-15)


def test_phase_gate():
    s = gates.phase_s().matrix
    np.testing.assert_array_equal(s @ [0, 1], [0, 1j])
    np.testing.assert_array_equal(gates.pauli_z().matrix @ s @ [0, 1], [0, -1j])
    np.testing.assert_array_equal(np.linalg.matrix_power(s, 4), np.eye(2))
    assert not np.allclose(np.linalg.matrix_power(s, 2), np.eye(2))


def test_gate_composition_names():
    g = gates.pauli_z() @ gates.phase_s()
    assert g.name == "Z·S"
    np.testing.assert_array_equal(g.matrix, np.diag([1, -1j]))
    np.testing.assert_allclose((g @ g.dagger()).matrix, np.eye(2), atol=1e-15)
