"""Counter-based random streams.

Every random quantity is a pure function of ``(seed, stream_index, tag, position)``.
A word of infinite length is therefore just a key: its symbol at position ``p``
is computed on demand, and two runs with the same key see the same word no
matter how samples are scheduled across threads.

The mixing function is the SplitMix64 finalizer applied to a Weyl sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

# Tags separate independent random objects that share a stream.
TAG_W = 1  # the word w (infinite, read lazily)
TAG_WPRIME = 2  # the word w'
TAG_AUX = 3  # auxiliary draws: coins, binomial lengths, ...
TAG_AUX2 = 4

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_STREAM_MUL = 0xD1B54A32D192ED03
_TAG_MUL = 0xAEF17502108EF2D9


@nb.njit(inline="always")
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


@nb.njit(inline="always")
def derive_key(seed, stream, tag):
    """Key of the random sequence ``(seed, stream, tag)``; all arguments uint64."""
    z = mix64(seed + np.uint64(_GOLDEN))
    z = mix64(z ^ (stream * np.uint64(_STREAM_MUL)))
    return mix64(z ^ (tag * np.uint64(_TAG_MUL)))


@nb.njit(inline="always")
def draw64(key, pos):
    return mix64(key + (pos + np.uint64(1)) * np.uint64(_GOLDEN))


@nb.njit(inline="always")
def draw_symbol(key, pos, k):
    # multiply-shift reduction; bias is below k / 2**32
    return np.int64(((draw64(key, pos) >> np.uint64(32)) * k) >> np.uint64(32))


@nb.njit(inline="always")
def draw_uniform(key, pos):
    return np.float64(draw64(key, pos) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@nb.njit(cache=True)
def _symbols(key, start, count, k):
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        out[i] = draw_symbol(key, np.uint64(start + i), np.uint64(k))
    return out


@nb.njit(cache=True)
def _uniforms(key, start, count):
    out = np.empty(count, dtype=np.float64)
    for i in range(count):
        out[i] = draw_uniform(key, np.uint64(start + i))
    return out


@nb.njit(cache=True)
def _key(seed, stream, tag):
    return derive_key(seed, stream, tag)


def _u64(x: int) -> np.uint64:
    return np.uint64(int(x) & MASK64)


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_index)``.

    The stream is a value: nothing is consumed when symbols are drawn, and
    :meth:`spawn` returns a new, independent stream rather than mutating.
    """

    seed: int
    stream_index: int = 0

    def key(self, tag: int) -> np.uint64:
        return np.uint64(_key(_u64(self.seed), _u64(self.stream_index), _u64(tag)))

    def symbols(self, k: int, count: int, *, tag: int = TAG_W, start: int = 0) -> np.ndarray:
        if k < 1:
            raise ValueError("alphabet size must be positive")
        return _symbols(self.key(tag), start, count, np.uint64(k))

    def symbol(self, k: int, pos: int, *, tag: int = TAG_W) -> int:
        return int(self.symbols(k, 1, tag=tag, start=pos)[0])

    def uniforms(self, count: int, *, tag: int = TAG_AUX, start: int = 0) -> np.ndarray:
        return _uniforms(self.key(tag), start, count)

    def spawn(self, offset: int) -> "RngStream":
        """Stream ``offset`` places further along the index space."""
        return RngStream(self.seed, (self.stream_index + offset) & MASK64)
