"""Per-shot counter-based random streams.

Every shot owns two independent Philox4x64-10 streams keyed by
``(master_seed, shot_index)``:

* the *bit* substream feeds random measurement outcomes, one bit per random
  measurement, taken least-significant bit first from successive 64-bit words;
* the *word* substream feeds noise sampling, one 64-bit word per noise
  location, whether or not a fault is drawn.

Keeping the two apart means that switching noise on or off never shifts the
measurement bits. Stream words are exactly ``numpy.random.Philox(key=K,
counter=C).random_raw()`` with ``K = master_seed + 2**64 * shot_index`` and
``C = substream * 2**64`` (substream 0 for bits, 1 for noise); in Random123
terms block ``j`` uses counter words ``(j + 1, substream, 0, 0)`` and key words
``(master_seed, shot_index)``.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
BIT_STREAM = 0
NOISE_STREAM = 1


def _philox(seed: int, shot: int, substream: int) -> np.random.Philox:
    if not 0 <= seed <= MASK64:
        raise ValueError("master seed must fit in 64 bits")
    if not 0 <= shot <= MASK64:
        raise ValueError("shot index must fit in 64 bits")
    return np.random.Philox(key=seed | (shot << 64), counter=substream << 64)


def stream_words(seed: int, shot: int, substream: int, count: int) -> np.ndarray:
    """First ``count`` raw 64-bit words of one substream."""
    if count <= 0:
        return np.zeros(0, dtype=np.uint64)
    return _philox(seed, shot, substream).random_raw(count)


class ShotRng:
    """Randomness source for a single shot."""

    def __init__(self, seed: int, shot: int = 0):
        self.seed = int(seed)
        self.shot = int(shot)
        self._bits = _philox(self.seed, self.shot, BIT_STREAM)
        self._words = _philox(self.seed, self.shot, NOISE_STREAM)
        self._buf = 0
        self._left = 0
        self.bits_used = 0
        self.words_used = 0

    def bit(self) -> int:
        if self._left == 0:
            self._buf = int(self._bits.random_raw())
            self._left = 64
        b = self._buf & 1
        self._buf >>= 1
        self._left -= 1
        self.bits_used += 1
        return b

    def word(self) -> int:
        self.words_used += 1
        return int(self._words.random_raw())


def threshold(p: float) -> int:
    """Integer threshold t with ``word < t`` happening with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return int(round(p * 2.0**64))


def fault_index(word: int, thr: int, n_choices: int) -> int:
    """Decode a noise word: -1 for no fault, else a choice in [0, n_choices).

    The choice reuses the word's position inside ``[0, thr)``, so each word
    carries both the Bernoulli trial and the uniform fault label.
    """
    if word >= thr:
        return -1
    return (word * n_choices) // thr
