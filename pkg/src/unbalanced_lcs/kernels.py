"""Compiled Monte Carlo loops.

Every kernel takes ``(seed, stream0, count, ...)`` and writes one row per
sample; sample ``s`` reads only stream ``stream0 + s``. Kernels release the
GIL so callers may shard the index range over threads.
"""

import numba as nb
import numpy as np

from .rng import TAG_AUX, TAG_W, TAG_WPRIME, derive_key, draw_symbol, draw_uniform
from .seqalgs import _lcs_bits, lnds_kernel

_NEG = -(1 << 62)

STRATEGY_SAME = 0
STRATEGY_DIFF = 1
STRATEGY_CHAIN = 2


@nb.njit(nogil=True, cache=True)
def dynamics_batch(seed, stream0, count, k, d, L, count_nontrivial, out_pos, out_b):
    uk = np.uint64(k)
    P = np.empty(d + 1, np.int64)
    sym = np.empty(d + 1, np.int64)
    for s in range(count):
        st = np.uint64(stream0 + s)
        kw = derive_key(seed, st, np.uint64(TAG_W))
        kwp = derive_key(seed, st, np.uint64(TAG_WPRIME))
        for i in range(d + 1):
            P[i] = i
        nontrivial = 0
        for step in range(L):
            c = draw_symbol(kwp, np.uint64(step), uk)
            for i in range(d + 1):
                sym[i] = draw_symbol(kw, np.uint64(P[i]), uk)
            if count_nontrivial:
                hit = False
                for i in range(d + 1):
                    for j in range(i + 1, d + 1):
                        if sym[i] == sym[j]:
                            hit = True
                            break
                    if hit:
                        break
                if hit:
                    nontrivial += 1
            prev = _NEG
            for i in range(d + 1):
                if sym[i] == c:
                    p = P[i] + 1
                else:
                    p = P[i] if P[i] > prev + 1 else prev + 1
                P[i] = p
                prev = p
        for i in range(d + 1):
            out_pos[s, i] = P[i]
        out_b[s] = nontrivial


@nb.njit(nogil=True, cache=True)
def concat_blocks_batch(seed, stream0, count, k, d, L, M, out_y):
    """Greedy blocks of one infinite word against ``M`` consecutive blocks of ``w'``."""
    uk = np.uint64(k)
    P = np.empty(d + 1, np.int64)
    sym = np.empty(d + 1, np.int64)
    for s in range(count):
        st = np.uint64(stream0 + s)
        kw = derive_key(seed, st, np.uint64(TAG_W))
        kwp = derive_key(seed, st, np.uint64(TAG_WPRIME))
        offset = 0
        for r in range(M):
            for i in range(d + 1):
                P[i] = offset + i
            for step in range(L):
                c = draw_symbol(kwp, np.uint64(r * L + step), uk)
                for i in range(d + 1):
                    sym[i] = draw_symbol(kw, np.uint64(P[i]), uk)
                prev = _NEG
                for i in range(d + 1):
                    if sym[i] == c:
                        p = P[i] + 1
                    else:
                        p = P[i] if P[i] > prev + 1 else prev + 1
                    P[i] = p
                    prev = p
            out_y[s, r] = P[d] - offset
            offset = P[d]


@nb.njit(nogil=True, cache=True)
def lcs_batch(seed, stream0, count, k, n, n_prime, out):
    uk = np.uint64(k)
    a = np.empty(n, np.int64)
    b = np.empty(n_prime, np.int64)
    for s in range(count):
        st = np.uint64(stream0 + s)
        kw = derive_key(seed, st, np.uint64(TAG_W))
        kwp = derive_key(seed, st, np.uint64(TAG_WPRIME))
        for i in range(n):
            a[i] = draw_symbol(kw, np.uint64(i), uk)
        for i in range(n_prime):
            b[i] = draw_symbol(kwp, np.uint64(i), uk)
        if n <= n_prime:
            out[s] = _lcs_bits(a, b, k)
        else:
            out[s] = _lcs_bits(b, a, k)


@nb.njit(nogil=True, cache=True)
def lnds_batch(seed, stream0, count, k, lengths, out):
    uk = np.uint64(k)
    buf = np.empty(max(lengths.max(), 1), np.int64)
    for s in range(count):
        st = np.uint64(stream0 + s)
        kw = derive_key(seed, st, np.uint64(TAG_W))
        m = lengths[s]
        for i in range(m):
            buf[i] = draw_symbol(kw, np.uint64(i), uk)
        out[s] = lnds_kernel(buf, m)


@nb.njit(nogil=True, cache=True)
def chain_batch(seed, stream0, count, start, L, cum, dest, star, out):
    """Run a finite chain ``L`` steps; count transitions flagged in ``star``."""
    width = cum.shape[1]
    for s in range(count):
        key = derive_key(seed, np.uint64(stream0 + s), np.uint64(TAG_AUX))
        x = start
        hits = 0
        for t in range(L):
            u = draw_uniform(key, np.uint64(t))
            j = 0
            while j < width - 1 and u >= cum[x, j]:
                j += 1
            if star[x, j]:
                hits += 1
            x = dest[x, j]
        out[s] = hits


@nb.njit(nogil=True, cache=True)
def two_game_batch(seed, stream0, count, k, L, strategy, out):
    """Rollouts of the (Delta, F) game; ``out[s] = (Delta, good turns, heads)``."""
    inv = 1.0 / k
    for s in range(count):
        key = derive_key(seed, np.uint64(stream0 + s), np.uint64(TAG_AUX))
        same = draw_uniform(key, np.uint64(0)) < inv
        delta = 1
        good = 0
        heads = 0
        for t in range(L):
            base = np.uint64(3 * t + 1)
            u = draw_uniform(key, base)
            toss = False
            if same:
                toss = u < inv
            elif u < inv:
                good += 1
                delta -= 1
                if delta < 1:
                    delta = 1
                if strategy == STRATEGY_SAME:
                    same = True
                elif strategy == STRATEGY_DIFF:
                    same = False
                else:
                    same = draw_uniform(key, base + np.uint64(2)) < inv
            elif u < 2.0 * inv:
                good += 1
                delta += 1
                toss = True
            if toss:
                if draw_uniform(key, base + np.uint64(1)) < 1.0 - inv:
                    heads += 1
                    same = False
                else:
                    same = True
        out[s, 0] = delta
        out[s, 1] = good
        out[s, 2] = heads
