from hypothesis import given, strategies as st

from adaptive_rsc import gf2

rows_st = st.lists(st.integers(0, 2**10 - 1), max_size=8)


def test_pack_unpack_examples():
    assert gf2.pack([1, 0, 1, 1]) == 0b1101
    assert gf2.unpack(0b1101, 6) == [1, 0, 1, 1, 0, 0]
    assert gf2.support_to_int([0, 3]) == 9
    assert gf2.int_to_support(9) == [0, 3]
    assert gf2.parity(0b1011) == 1
    assert gf2.parity(0) == 0


def test_rank_and_span_examples():
    rows = [0b110, 0b011, 0b101]
    assert gf2.rank(rows) == 2
    assert gf2.in_span(rows, 0b000)
    assert not gf2.in_span(rows, 0b111)


def test_solve_examples():
    # x0 ^ x1 = 1, x1 ^ x2 = 0
    x = gf2.solve([0b011, 0b110], 3, [1, 0])
    assert gf2.parity(x & 0b011) == 1 and gf2.parity(x & 0b110) == 0
    assert gf2.solve([0b1, 0b1], 1, [0, 1]) is None


@given(st.lists(st.integers(0, 1), max_size=40))
def test_pack_roundtrip(bits):
    assert gf2.unpack(gf2.pack(bits), len(bits)) == bits


@given(rows_st, st.integers(0, 2**10 - 1))
def test_solve_consistent(rows, x):
    rhs = [gf2.parity(r & x) for r in rows]
    y = gf2.solve(rows, 10, rhs)
    assert y is not None
    assert [gf2.parity(r & y) for r in rows] == rhs


@given(rows_st, st.lists(st.booleans(), max_size=8))
def test_combinations_in_span(rows, pick):
    v = 0
    for r, p in zip(rows, pick):
        if p:
            v ^= r
    assert gf2.in_span(rows, v)
    assert gf2.rank(rows + [v]) == gf2.rank(rows)
