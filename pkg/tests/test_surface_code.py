import pytest

from adaptive_rsc import gf2
from adaptive_rsc.adaptive_prep import build_prep_circuit
from adaptive_rsc.circuit_lang import depth
from adaptive_rsc.surface_code import (LayoutError, build_strip, energy, ideal_tableau, logical_operators,
                                       product_tableau, stabilizer_generators)

LENGTHS = [1, 3, 5, 7, 9]


def test_strip5_counts(strip5):
    assert (strip5.n_data, strip5.n_ancilla, strip5.n_qubits) == (12, 7, 19)
    z_weights = sorted(c.weight for c in strip5.z_checks)
    x_weights = sorted(c.weight for c in strip5.x_checks)
    assert z_weights == [2, 2, 2, 2, 4, 4, 4]
    assert x_weights == [2, 2, 4, 4]
    assert len(strip5.logical_x) == 6
    assert len(strip5.logical_z_left) == len(strip5.logical_z_right) == 2


@pytest.mark.parametrize("L", LENGTHS)
def test_stabilizer_count_identity(L):
    lay = build_strip(L)
    assert len(lay.z_checks) + len(lay.x_checks) == 2 * (L + 1) - 1


@pytest.mark.parametrize("L", [0, 2, -1, 4])
def test_bad_lengths(L):
    with pytest.raises(LayoutError):
        build_strip(L)


@pytest.mark.parametrize("L", LENGTHS)
def test_product_of_z_checks_is_both_logicals(L):
    lay = build_strip(L)
    prod = 0
    for row in lay.hz_rows:
        prod ^= row
    assert prod == gf2.support_to_int(lay.logical_z_left + lay.logical_z_right)


def test_p0_plaquette(strip5):
    sz = stabilizer_generators(strip5)[1][strip5.z_index["P0"]]
    d = strip5.data_index
    assert sz.z_bits == gf2.support_to_int([d(0, 0), d(0, 1), d(1, 0), d(1, 1)]) and sz.x_bits == 0


@pytest.mark.parametrize("L", LENGTHS)
def test_commutation_pattern(L):
    lay = build_strip(L)
    sx, sz = stabilizer_generators(lay)
    logic = logical_operators(lay)
    for a in sx + sz:
        assert all(a.commutes(b) for b in sx + sz)
        assert all(a.commutes(lg) for lg in logic.values())
    assert not logic["X"].commutes(logic["Z_L"])
    assert not logic["X"].commutes(logic["Z_R"])
    rows = [p.x_bits | (p.z_bits << lay.n_qubits) for p in sx + sz]
    assert gf2.rank(rows) == len(rows)


@pytest.mark.parametrize("L", LENGTHS)
def test_connectivity_is_incidence(L):
    lay = build_strip(L)
    data, anc = set(lay.data_qubits), set(lay.ancilla_qubits)
    assert len(lay.connectivity) == sum(c.weight for c in lay.z_checks)
    for a, b in lay.connectivity:
        assert a in data and b in anc


def test_strip5_schedule(strip5):
    sched = strip5.schedule
    # three weight-4 and four weight-2 Z checks
    assert len(sched) == 3 * 4 + 4 * 2 == 20
    assert {layer for _, _, layer in sched} == {1, 2, 3, 4}
    for layer in range(1, 5):
        qs = [q for d, a, lay in sched if lay == layer for q in (d, a)]
        assert len(qs) == len(set(qs))
    for chk in strip5.z_checks:
        if chk.weight != 2:
            continue
        a = strip5.ancilla_of(strip5.z_index[chk.name])
        layers = {lay for _, anc, lay in sched if anc == a}
        assert layers == ({1, 2} if chk.name.startswith("T") else {3, 4})


@pytest.mark.parametrize("L", LENGTHS)
def test_schedule_depth_four(L):
    assert depth(build_prep_circuit(build_strip(L))) == 4


def test_energy_examples(strip5):
    assert energy(ideal_tableau(strip5), strip5) == -11
    assert energy(product_tableau(strip5), strip5) == -4
    t = product_tableau(strip5)
    sz = stabilizer_generators(strip5)[1]
    for k, p in enumerate(sz):
        t.measure(p, forced=1 if k == 3 else 0)
    assert energy(t, strip5) == -9


def test_layout_id_stable():
    assert build_strip(5).layout_id == build_strip(5).layout_id
    assert build_strip(5).layout_id != build_strip(3).layout_id
