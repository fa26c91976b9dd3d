import numpy as np
import pytest

from adaptive_rsc.rng import ShotRng, fault_index, stream_words, threshold

# Published philox4x64-10 known-answer vectors: (counter words, key words, output words).
KAT = [
    ((0, 0, 0, 0), (0, 0),
     (0x16554d9eca36314c, 0xdb20fe9d672d0fdc, 0xd7e772cee186176b, 0x7e68b68aec7ba23b)),
    ((2**64 - 1,) * 4, (2**64 - 1,) * 2,
     (0x87b092c3013fe90b, 0x438c3c67be8d0224, 0x9cc7d7c69cd777b6, 0xa09caebf594f0ba0)),
    ((0x243f6a8885a308d3, 0x13198a2e03707344, 0xa4093822299f31d0, 0x082efa98ec4e6c89),
     (0x452821e638d01377, 0xbe5466cf34e90c6c),
     (0xa528f45403e61d95, 0x38c72dbd566e9788, 0xa5a1610e72fd18b5, 0x57bd43b5e52b7fe6)),
]


@pytest.mark.parametrize("ctr,key,want", KAT)
def test_philox_known_answers(ctr, key, want):
    c = sum(w << (64 * i) for i, w in enumerate(ctr))
    k = key[0] | (key[1] << 64)
    # the generator bumps its counter before producing a block
    g = np.random.Philox(key=k, counter=(c - 1) % 2**256)
    assert [int(w) for w in g.random_raw(4)] == list(want)


def test_stream_layout_matches_block_counter():
    seed, shot = 0x452821e638d01377, 3
    for sub in (0, 1):
        words = stream_words(seed, shot, sub, 8)
        g = np.random.Philox(key=seed | (shot << 64), counter=sub << 64)
        assert np.array_equal(words, g.random_raw(8))


def test_bits_are_lsb_first():
    rng = ShotRng(5, 2)
    w = int(stream_words(5, 2, 0, 1)[0])
    assert [rng.bit() for _ in range(64)] == [(w >> i) & 1 for i in range(64)]
    assert rng.bits_used == 64


def test_bit_and_noise_streams_independent():
    a, b = ShotRng(9, 1), ShotRng(9, 1)
    for _ in range(10):
        b.word()
    assert [a.bit() for _ in range(200)] == [b.bit() for _ in range(200)]
    assert b.words_used == 10


def test_shots_and_seeds_differ():
    assert not np.array_equal(stream_words(1, 0, 0, 4), stream_words(1, 1, 0, 4))
    assert not np.array_equal(stream_words(1, 0, 0, 4), stream_words(2, 0, 0, 4))
    assert not np.array_equal(stream_words(1, 0, 0, 4), stream_words(1, 0, 1, 4))


def test_out_of_range_seed():
    with pytest.raises(ValueError):
        ShotRng(-1)
    with pytest.raises(ValueError):
        ShotRng(2**64)


def test_threshold_and_fault_index():
    assert threshold(0.0) == 0
    assert threshold(1.0) == 2**64
    assert threshold(0.5) == 2**63
    with pytest.raises(ValueError):
        threshold(1.5)
    thr = threshold(0.3)
    assert fault_index(thr, thr, 15) == -1
    assert fault_index(0, thr, 15) == 0
    assert fault_index(thr - 1, thr, 15) == 14
    assert fault_index(123, 0, 3) == -1


def test_fault_labels_uniform():
    thr = threshold(0.5)
    words = stream_words(17, 0, 1, 60_000)
    labels = [fault_index(int(w), thr, 3) for w in words]
    counts = np.bincount(np.array(labels) + 1, minlength=4)
    assert abs(counts[0] / 60_000 - 0.5) < 0.01
    assert np.all(np.abs(counts[1:] / 60_000 - 1 / 6) < 0.01)
