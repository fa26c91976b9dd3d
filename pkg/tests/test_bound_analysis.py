import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adaptive_rsc.bound_analysis import (CLIFFORD_WORDS, IDEAL_P, SWAP_WORD, BoundError, LayeredCircuit,
                                         PovmProfile, _apply_word, bhattacharyya_bound, cones_disjoint,
                                         connected_correlation, extremal_circuit, max_product_form_bound,
                                         past_cone, povm_distribution, product_form, product_form_bound,
                                         random_two_qubit_clifford, sample_ceiling)
from adaptive_rsc.pauli_tableau import PauliString, StabilizerTableau, exact_state_overlap
from adaptive_rsc.surface_code import build_strip, ideal_tableau, logical_operators, product_tableau, target_generators

unit = st.floats(0.0, 1.0)


def test_bhattacharyya_examples():
    q = (0.1, 0.2, 0.3, 0.4)
    assert bhattacharyya_bound(q, q) == pytest.approx(1.0)
    assert bhattacharyya_bound(IDEAL_P, (0, 1, 0, 0)) == 0.0
    assert bhattacharyya_bound(IDEAL_P, (0.25,) * 4) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(BoundError):
        bhattacharyya_bound(IDEAL_P, (0.5, 0.6, 0, 0))
    with pytest.raises(BoundError):
        bhattacharyya_bound(IDEAL_P, (1, 0, 0))


def test_grid_maximum():
    assert abs(max_product_form_bound(1e-3) - 0.5) <= 1e-9
    assert abs(max_product_form_bound(0.01) - 0.5) <= 1e-9
    for bad in (0.0, 0.02, -1e-3):
        with pytest.raises(BoundError):
            max_product_form_bound(bad)


def test_a_equals_one_line():
    bs = np.linspace(0, 1, 101)
    vals = [product_form_bound(1.0, b) for b in bs]
    assert np.allclose(vals, bs / 2)
    assert max(vals) == pytest.approx(0.5) and bs[int(np.argmax(vals))] == 1.0


def test_diagonal_is_flat():
    for a in np.linspace(0, 1, 51):
        assert product_form_bound(a, a) == pytest.approx(0.5, abs=1e-12)


@given(unit, unit)
def test_closed_form_matches_definition(a, b):
    direct = bhattacharyya_bound(IDEAL_P, product_form(a, b))
    assert product_form_bound(a, b) == pytest.approx(direct, abs=1e-12)
    assert direct <= 0.5 + 1e-12


def test_povm_examples(strip5):
    assert connected_correlation(ideal_tableau(strip5), strip5) == 1.0
    assert connected_correlation(product_tableau(strip5), strip5) == 0.0
    prof = PovmProfile.from_q(povm_distribution(ideal_tableau(strip5), strip5))
    assert prof.q == (0.5, 0.0, 0.0, 0.5) and prof.bound == pytest.approx(1.0)
    prof = PovmProfile.from_q(povm_distribution(product_tableau(strip5), strip5))
    assert prof.q == (0.25,) * 4 and prof.product_residual == 0.0


def test_cone_examples(strip5):
    d = strip5.data_index
    zl = strip5.logical_z_left
    assert past_cone(strip5, zl, 0) == frozenset(zl)
    anc = {strip5.ancilla_of(strip5.z_index[n]) for n in ("P0", "T1", "B1")}
    want = {d(r, c) for r in (0, 1) for c in (0, 1, 2)} | anc
    assert past_cone(strip5, zl, 4) == want
    assert cones_disjoint(strip5, 4).disjoint
    three = cones_disjoint(build_strip(3), 4)
    assert not three.disjoint and three.overlap
    with pytest.raises(BoundError):
        past_cone(strip5, [], 2)
    with pytest.raises(BoundError):
        past_cone(strip5, zl, -1)


@pytest.mark.parametrize("L", [1, 3, 5, 7])
def test_depth_zero_always_disjoint(L):
    assert cones_disjoint(build_strip(L), 0).disjoint


@pytest.mark.parametrize("L", [3, 5, 7])
def test_cones_monotone_and_mirror_symmetric(L):
    lay = build_strip(L)
    mirror_data = {lay.data_index(r, c): lay.data_index(r, L - c) for r in (0, 1) for c in range(L + 1)}
    # every Z check spans columns (c, c+1), so mirroring sends index c to L-1-c
    names = {chk.name: f"{chk.name[0]}{L - 1 - int(chk.name[1:])}" for chk in lay.z_checks}
    mirror = dict(mirror_data)
    for chk in lay.z_checks:
        mirror[lay.ancilla_of(lay.z_index[chk.name])] = lay.ancilla_of(lay.z_index[names[chk.name]])
    prev = frozenset()
    for depth in range(6):
        rep = cones_disjoint(lay, depth)
        assert prev <= rep.cone_left
        prev = rep.cone_left
        assert frozenset(mirror[q] for q in rep.cone_left) == rep.cone_right


def test_cone_report_json(strip5):
    d = json.loads(cones_disjoint(strip5, 4).to_json())
    assert set(d) == {"layout_id", "depth", "disjoint", "cones", "overlap"}
    assert d["disjoint"] is True and d["overlap"] == []


def _symplectic_image(word):
    """Images of X0, X1 (destabilizers) and Z0, Z1 (stabilizers), signs dropped."""
    t = StabilizerTableau(2)
    _apply_word(t, word, 0, 1)
    return tuple((p.x_bits, p.z_bits) for p in t.destab_rows + t.stab_rows)


def test_clifford_words_cover_sp4():
    images = {_symplectic_image(w) for w in CLIFFORD_WORDS}
    assert len(CLIFFORD_WORDS) == 720 == len(images)


def test_swap_word_swaps():
    t = StabilizerTableau(2).apply("H", 0)
    _apply_word(t, SWAP_WORD, 0, 1)
    assert t.expectation(PauliString.from_label("_X")) == 1
    assert t.expectation(PauliString.from_label("Z_")) == 1


def test_random_clifford_has_pauli_tail():
    rng = np.random.default_rng(0)
    tails = {random_two_qubit_clifford(rng)[-2:] for _ in range(400)}
    assert len(tails) > 4


@pytest.mark.parametrize("L", [1, 3, 5, 7, 9])
def test_extremal_circuit_reaches_half(L):
    lay = build_strip(L)
    circ = extremal_circuit(lay)
    circ.check(lay)
    assert circ.depth == 4
    t = circ.run(lay.n_qubits)
    assert exact_state_overlap(t, target_generators(lay)) == 0.5
    logic = logical_operators(lay)
    assert t.expectation(logic["Z_L"]) == t.expectation(logic["Z_R"]) == 1
    for a in lay.ancilla_qubits:
        assert t.expectation(lay.pauli("Z", [a])) == 1


def test_layered_circuit_rejects_bad_layers(strip5):
    with pytest.raises(BoundError):
        LayeredCircuit([()] * 19, [[(0, 1, ("CX01",))]]).check(strip5)
    e = strip5.connectivity[0]
    with pytest.raises(BoundError):
        LayeredCircuit([()] * 19, [[(e[0], e[1], ("CX01",)), (e[1], e[0], ("CX01",))]]).check(strip5)


def test_random_circuits_respect_bound(strip5):
    samples = sample_ceiling(strip5, 60, 4, seed=3) + sample_ceiling(strip5, 60, 4, seed=3, ensemble="perturbed")
    for s in samples:
        assert s.fidelity <= s.povm.bound + 1e-12
        assert s.fidelity <= 0.5
        # disjoint cones: the logical POVM factorizes exactly
        assert s.povm.product_residual <= 1e-12
        assert s.connected == 0.0


def test_sampling_is_order_free(strip5):
    a = sample_ceiling(strip5, 6, seed=9)
    b = sample_ceiling(strip5, 3, seed=9)
    assert [s.fidelity for s in a[:3]] == [s.fidelity for s in b]
    with pytest.raises(BoundError):
        sample_ceiling(strip5, 1, ensemble="other")
    with pytest.raises(BoundError):
        sample_ceiling(strip5, 1, depth=3, ensemble="perturbed")

