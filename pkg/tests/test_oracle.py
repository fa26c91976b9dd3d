import numpy as np
import pytest

from adaptive_rsc import oracle as sv
from adaptive_rsc.pauli_tableau import PauliString

P = PauliString.from_label


def test_bell_amplitudes():
    s = sv.StateVector.zeros(2)
    sv.sv_apply(s, "H", [0])
    sv.sv_apply(s, "CNOT", [0, 1])
    assert np.allclose(s.amplitudes, [2**-0.5, 0, 0, 2**-0.5])
    assert sv.sv_expectation(s, P("XX")) == pytest.approx(1.0)
    assert sv.sv_expectation(s, P("YY")) == pytest.approx(-1.0)
    assert sv.marginal_distribution(s, [0, 1]) == pytest.approx([0.5, 0, 0, 0.5])


def test_qubit_order_is_little_endian():
    s = sv.StateVector.zeros(3)
    sv.sv_apply(s, "X", [1])
    assert s.amplitudes[2] == 1.0
    assert sv.sv_probability(s, 1, "Z") == 1.0


def test_measure_forced_and_probability():
    s = sv.StateVector.zeros(1)
    sv.sv_apply(s, "H", [0])
    assert sv.sv_probability(s, 0, "X") == pytest.approx(0.0)
    bit, p = sv.sv_measure(s, 0, "Z", forced=1)
    assert bit == 1 and p == pytest.approx(0.5)
    assert s.amplitudes == pytest.approx([0, 1])


def test_stabilizer_state_and_overlap():
    ghz = sv.stabilizer_state(3, [P("XXX"), P("ZZ_"), P("_ZZ")])
    assert abs(ghz.amplitudes[0]) ** 2 == pytest.approx(0.5)
    assert abs(ghz.amplitudes[7]) ** 2 == pytest.approx(0.5)
    assert sv.sv_overlap(ghz, sv.StateVector.zeros(3)) == pytest.approx(0.5)


def test_phase_gate():
    s = sv.StateVector.zeros(1)
    sv.sv_apply(s, "H", [0])
    sv.sv_apply(s, "S", [0])
    assert sv.sv_expectation(s, P("Y")) == pytest.approx(1.0)


def test_limits():
    with pytest.raises(sv.OracleError):
        sv.StateVector.zeros(sv.MAX_QUBITS + 1)
    with pytest.raises(sv.OracleError):
        sv.sv_measure(sv.StateVector.zeros(1), 0, "Z")
