"""Words over a k-letter alphabet and the containment predicates built on them.

Symbols are stored 0-based (``0..k-1``). The conventional alphabet ``{1..k}``
only appears at the text boundary, see :meth:`Word.parse` and :meth:`Word.format`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import islice
from typing import Iterable, Iterator, Sequence

import numpy as np

from .rng import TAG_W, RngStream
from .seqalgs import lcs_alignment, lcs_length


class WordExhausted(RuntimeError):
    """A finite word ran out before a waiting time was decided."""


class Word:
    """Immutable finite word over the alphabet ``{0, ..., k-1}``."""

    __slots__ = ("_symbols", "k")

    def __init__(self, symbols: Iterable[int], k: int):
        if k < 1:
            raise ValueError("alphabet size must be positive")
        arr = np.array(list(symbols) if not isinstance(symbols, np.ndarray) else symbols, dtype=np.int64).reshape(-1)
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ValueError(f"symbols must lie in 0..{k - 1}")
        arr.setflags(write=False)
        self._symbols = arr
        self.k = int(k)

    @property
    def symbols(self) -> np.ndarray:
        return self._symbols

    def __len__(self) -> int:
        return int(self._symbols.size)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self._symbols[item], self.k)
        return int(self._symbols[item])

    def __iter__(self) -> Iterator[int]:
        return iter(self._symbols.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self.k == other.k and np.array_equal(self._symbols, other._symbols)

    def __hash__(self) -> int:
        return hash((self.k, self._symbols.tobytes()))

    def __add__(self, other: "Word") -> "Word":
        if self.k != other.k:
            raise ValueError("alphabet sizes differ")
        return Word(np.concatenate([self._symbols, other._symbols]), self.k)

    def __repr__(self) -> str:
        return f"Word({self.to_text()!r}, k={self.k})"

    def prefix(self, m: int) -> "Word":
        return self[:m]

    # text forms ---------------------------------------------------------

    @classmethod
    def parse(cls, text: str, k: int, *, one_based: bool = False) -> "Word":
        """Read a digit string (``k <= 10``) or a JSON array of integers."""
        text = text.strip()
        if text.startswith("["):
            values = json.loads(text)
        else:
            values = [int(c) for c in text]
        if one_based:
            values = [v - 1 for v in values]
        return cls(values, k)

    @classmethod
    def from_letters(cls, text: str, alphabet: str) -> "Word":
        """Word over ``alphabet`` with ``alphabet[i]`` mapped to symbol ``i``."""
        index = {c: i for i, c in enumerate(alphabet)}
        return cls([index[c] for c in text], len(alphabet))

    def format(self, *, one_based: bool = False) -> str:
        """Digit string when every symbol fits in one digit, JSON array otherwise."""
        shift = 1 if one_based else 0
        if self.k + shift <= 10:
            return "".join(str(s + shift) for s in self._symbols.tolist())
        return json.dumps([s + shift for s in self._symbols.tolist()])

    def to_text(self) -> str:
        return self.format()


class LazyWord:
    """Infinite random word whose symbols are computed on demand from a stream."""

    def __init__(self, rng: RngStream, k: int, *, tag: int = TAG_W, chunk: int = 256):
        self.rng = rng
        self.k = k
        self.tag = tag
        self._chunk = chunk
        self._cache = np.empty(0, dtype=np.int64)

    def _ensure(self, n: int) -> None:
        if n > self._cache.size:
            size = max(n, 2 * self._cache.size, self._chunk)
            self._cache = self.rng.symbols(self.k, size, tag=self.tag)

    def __getitem__(self, pos: int) -> int:
        if pos < 0:
            raise IndexError("lazy words have no end to index from")
        self._ensure(pos + 1)
        return int(self._cache[pos])

    def __iter__(self) -> Iterator[int]:
        pos = 0
        while True:
            yield self[pos]
            pos += 1

    def prefix(self, m: int) -> Word:
        self._ensure(m)
        return Word(self._cache[:m].copy(), self.k)


@dataclass(frozen=True)
class DeletionBudgetVector:
    """Per-block deletion budgets ``d_1..d_M`` for blocks of length ``block_length``."""

    budgets: tuple[int, ...]
    block_length: int

    def __post_init__(self):
        if self.block_length < 1:
            raise ValueError("block length must be positive")
        if any(d < 0 for d in self.budgets):
            raise ValueError("budgets must be non-negative")
        object.__setattr__(self, "budgets", tuple(int(d) for d in self.budgets))

    @property
    def total(self) -> int:
        return sum(self.budgets)

    def __len__(self) -> int:
        return len(self.budgets)


def sample_word(k: int, n: int, rng: RngStream, *, tag: int = TAG_W) -> Word:
    """Uniform random word of length ``n``; reproducible from ``(seed, stream_index)``."""
    if k < 1:
        raise ValueError("alphabet size must be positive")
    if n < 0:
        raise ValueError("length must be non-negative")
    return Word(rng.symbols(k, n, tag=tag), k)


def is_subsequence(u: Sequence[int], w: Sequence[int]) -> bool:
    """Greedy left-to-right matching."""
    it = iter(w)
    return all(any(x == y for y in it) for x in u)


def almost_contained(u, w, d: int) -> bool:
    """True iff deleting at most ``d`` symbols of ``u`` leaves a subsequence of ``w``."""
    if d < 0:
        raise ValueError("budget must be non-negative")
    return len(u) - lcs_length(u, w) <= d


def _longest_almost_prefix(symbols: Iterable[int], block: Sequence[int], d: int) -> tuple[int, bool]:
    """Scan ``symbols`` keeping the LCS row against ``block``.

    Returns ``(m, exhausted)``: ``m`` is the length of the longest prefix that is
    ``d``-almost contained in ``block``; ``exhausted`` says whether ``symbols``
    ended first. Adding one symbol raises the LCS by at most one, so deficits
    never recover and the scan stops at the first failure.
    """
    b = list(block)
    row = [0] * (len(b) + 1)
    m = 0
    for x in symbols:
        new = [0] * (len(b) + 1)
        for j, y in enumerate(b):
            new[j + 1] = row[j] + 1 if x == y else max(row[j + 1], new[j])
        if m + 1 - new[-1] > d:
            return m, False
        row = new
        m += 1
    return m, True


def waiting_time(w, w_prime_prefix: Sequence[int], d: int) -> int:
    """Largest ``m`` such that ``w[:m]`` is ``d``-almost contained in ``w_prime_prefix``.

    ``w`` may be a finite :class:`Word` or a :class:`LazyWord`; a finite word
    that ends while its prefixes are still contained raises :class:`WordExhausted`.
    """
    if d < 0:
        raise ValueError("budget must be non-negative")
    m, exhausted = _longest_almost_prefix(iter(w), w_prime_prefix, d)
    if exhausted:
        raise WordExhausted(f"word of length {m} is entirely {d}-almost contained")
    return m


def standard_prefix(w: Word, w_prime: Word, dvec: DeletionBudgetVector) -> tuple[list[Word], int]:
    """Greedy block decomposition of ``w`` against the blocks of ``w_prime``.

    Block ``i`` is the longest prefix of what remains of ``w`` that is
    ``d_i``-almost contained in the ``i``-th length-``L`` block of ``w_prime``.
    Returns the blocks and the number of symbols of ``w`` they consume.
    """
    L = dvec.block_length
    if len(w_prime) != L * len(dvec):
        raise ValueError("w_prime must consist of exactly M blocks of length L")
    blocks = []
    pos = 0
    symbols = w.symbols.tolist()
    for i, d in enumerate(dvec.budgets):
        m, _ = _longest_almost_prefix(islice(symbols, pos, None), w_prime.symbols[i * L:(i + 1) * L].tolist(), d)
        blocks.append(w[pos:pos + m])
        pos += m
    return blocks, pos


def is_dvec_contained(w: Word, w_prime: Word, dvec: DeletionBudgetVector) -> bool:
    """``w`` splits into ``w_1..w_M`` with each ``w_i`` ``d_i``-almost contained in block ``i``."""
    _, consumed = standard_prefix(w, w_prime, dvec)
    return consumed == len(w)


def lcs_dominating_dvec(w: Word, w_prime: Word, block_length: int) -> DeletionBudgetVector:
    """Budget vector read off a longest common subsequence.

    Cut ``w`` just before the first symbol matched into each next block; the
    budget of a piece is its number of unmatched symbols. The budgets sum to
    ``len(w) - LCS(w, w_prime)`` and ``w`` is contained piece by piece.
    """
    L = block_length
    if L < 1 or len(w_prime) % L:
        raise ValueError("len(w_prime) must be a positive multiple of the block length")
    M = len(w_prime) // L
    pairs = lcs_alignment(w, w_prime)
    # first position of w matched into each block
    first_in_block: dict[int, int] = {}
    for i, j in pairs:
        first_in_block.setdefault(j // L, i)
    matched = np.zeros(len(w), dtype=bool)
    for i, _ in pairs:
        matched[i] = True
    cuts = []
    start = 0
    for r in range(M):
        if r == M - 1:
            end = len(w)
        else:
            # earliest symbol matched into any later block bounds this piece
            later = [first_in_block[b] for b in range(r + 1, M) if b in first_in_block]
            end = min(later) if later else len(w)
        end = max(end, start)
        cuts.append((start, end))
        start = end
    budgets = [int((~matched[a:b]).sum()) for a, b in cuts]
    return DeletionBudgetVector(tuple(budgets), L)
