"""Longest common subsequence and longest non-decreasing subsequence."""

from __future__ import annotations

from bisect import bisect_right
from typing import Sequence

import numba as nb
import numpy as np

# Below this many DP cells the plain DP is cheaper than building bit masks.
_BITPARALLEL_MIN_CELLS = 1 << 16


def _as_array(seq) -> np.ndarray:
    if isinstance(seq, np.ndarray):
        return seq.astype(np.int64, copy=False)
    symbols = getattr(seq, "symbols", seq)
    return np.asarray(symbols, dtype=np.int64).reshape(-1)


@nb.njit(cache=True)
def _lcs_dp(a, b):
    # rolling rows over the shorter word
    if a.shape[0] < b.shape[0]:
        a, b = b, a
    n = b.shape[0]
    prev = np.zeros(n + 1, np.int64)
    cur = np.zeros(n + 1, np.int64)
    for i in range(a.shape[0]):
        ai = a[i]
        cur[0] = 0
        for j in range(n):
            if ai == b[j]:
                cur[j + 1] = prev[j] + 1
            elif cur[j] > prev[j + 1]:
                cur[j + 1] = cur[j]
            else:
                cur[j + 1] = prev[j + 1]
        prev, cur = cur, prev
    return prev[n]


@nb.njit(cache=True)
def _lcs_bits(a, b, k):
    """Bit-vector LCS: one multiword addition per symbol of ``b``."""
    m = a.shape[0]
    if m == 0 or b.shape[0] == 0:
        return 0
    nw = (m + 63) // 64
    masks = np.zeros((k, nw), dtype=np.uint64)
    one = np.uint64(1)
    for i in range(m):
        masks[a[i], i >> 6] |= one << np.uint64(i & 63)
    V = np.full(nw, np.uint64(0xFFFFFFFFFFFFFFFF))
    for j in range(b.shape[0]):
        M = masks[b[j]]
        carry = np.uint64(0)
        for t in range(nw):
            v = V[t]
            s = v + (v & M[t])
            c1 = one if s < v else np.uint64(0)
            s2 = s + carry
            c2 = one if s2 < s else np.uint64(0)
            carry = c1 | c2
            V[t] = s2 | (v & ~M[t])
    zeros = 0
    for i in range(m):
        if (V[i >> 6] >> np.uint64(i & 63)) & one == 0:
            zeros += 1
    return zeros


def lcs_length(u, w, *, method: str = "auto") -> int:
    """Length of the longest common subsequence of ``u`` and ``w``.

    ``method`` is ``"dp"`` (rolling-row dynamic programme), ``"bits"``
    (bit-parallel) or ``"auto"``. Both return identical values.
    """
    a, b = _as_array(u), _as_array(w)
    if a.size == 0 or b.size == 0:
        return 0
    if method == "auto":
        method = "bits" if a.size * b.size >= _BITPARALLEL_MIN_CELLS else "dp"
    if method == "dp":
        return int(_lcs_dp(a, b))
    if method == "bits":
        if a.size > b.size:
            a, b = b, a
        k = int(max(a.max(), b.max())) + 1
        return int(_lcs_bits(a, b, k))
    raise ValueError(f"unknown method {method!r}")


def lcs_table(u, w) -> np.ndarray:
    """Full ``(len(u)+1) x (len(w)+1)`` LCS table; for traceback on small inputs."""
    a, b = _as_array(u), _as_array(w)
    table = np.zeros((a.size + 1, b.size + 1), dtype=np.int64)
    for i in range(a.size):
        for j in range(b.size):
            if a[i] == b[j]:
                table[i + 1, j + 1] = table[i, j] + 1
            else:
                table[i + 1, j + 1] = max(table[i, j + 1], table[i + 1, j])
    return table


def lcs_alignment(u, w) -> list[tuple[int, int]]:
    """Index pairs ``(i, j)`` of one longest common subsequence, increasing in both."""
    a, b = _as_array(u), _as_array(w)
    table = lcs_table(a, b)
    pairs = []
    i, j = a.size, b.size
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1]:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif table[i - 1, j] >= table[i, j - 1]:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs


def lnds(w: Sequence[int]) -> int:
    """Length of the longest non-decreasing subsequence (patience sorting).

    ``tails[j]`` is the smallest possible last symbol of a non-decreasing
    subsequence of length ``j+1``; equal symbols extend, hence ``bisect_right``.
    """
    tails: list[int] = []
    for x in _as_array(w).tolist():
        pos = bisect_right(tails, x)
        if pos == len(tails):
            tails.append(x)
        else:
            tails[pos] = x
    return len(tails)


def lnds_restricted(w: Sequence[int], ceiling: int) -> int:
    """LNDS of ``w`` after deleting every symbol greater than ``ceiling``."""
    a = _as_array(w)
    return lnds(a[a <= ceiling])


@nb.njit(cache=True)
def lnds_kernel(a, n):
    """LNDS of ``a[:n]``; scratch-free patience sorting for the Monte Carlo loops."""
    tails = np.empty(max(n, 1), np.int64)
    size = 0
    for i in range(n):
        x = a[i]
        lo, hi = 0, size
        while lo < hi:
            mid = (lo + hi) >> 1
            if tails[mid] <= x:
                lo = mid + 1
            else:
                hi = mid
        tails[lo] = x
        if lo == size:
            size += 1
    return size
