"""Counter-based random streams: sample ``k`` of a run seeded with ``seed`` always
draws from Philox(key=seed) with the top counter word set to ``k``, so results do
not depend on how samples are batched or scheduled."""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def stream(seed: int, index: int) -> np.random.Philox:
    return np.random.Philox(key=int(seed) & MASK64, counter=[0, 0, 0, int(index)])


class StreamFactory:
    """Reuses one Philox object and rewinds it to each sample's counter.

    Produces exactly the same words as :func:`stream` while avoiding the cost
    of constructing a generator per sample.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._bg = stream(self.seed, 0)
        self._template = self._bg.state

    def raw(self, index: int, n_words: int) -> np.ndarray:
        st = self._template
        st["state"]["counter"][:] = (0, 0, 0, int(index))
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self._bg.state = st
        return self._bg.random_raw(n_words)

    def block(self, start: int, stop: int, n_words: int) -> np.ndarray:
        return np.stack([self.raw(k, n_words) for k in range(start, stop)])


def uniforms(words: np.ndarray) -> np.ndarray:
    """53-bit uniforms in [0, 1), one per raw word."""
    return (words >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def pack_bits(flags: np.ndarray) -> np.ndarray:
    """Pack boolean rows little-endian into uint64 words (flag k -> bit k % 64 of word k // 64)."""
    n = flags.shape[-1]
    pad = (-n) % 64
    if pad:
        flags = np.concatenate([flags, np.zeros(flags.shape[:-1] + (pad,), dtype=bool)], axis=-1)
    packed = np.packbits(flags, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64)


def words_needed(n: int, r: float) -> int:
    """Raw words per sample: one bit per spin at r = 1/2, one uniform per spin otherwise."""
    return (n + 63) // 64 if r == 0.5 else n
