"""Monte Carlo estimators for LCS constants, particle drifts and LNDS means.

Sample ``s`` of an estimator always uses stream ``rng.stream_index + s``.
Samples are split into contiguous shards run on a thread pool (the compiled
kernels release the GIL) and reassembled in index order, so a report depends
on the seed and parameters only, never on the thread count.
"""

from __future__ import annotations

import logging
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numba as nb
import numpy as np
from scipy.stats import binom

from . import kernels
from .rng import MASK64, RngStream, derive_key, draw_uniform
from .report import EstimateReport

log = logging.getLogger(__name__)

THREADS_ENV = "UNBALANCED_LCS_THREADS"


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _seed(rng: RngStream) -> np.uint64:
    return np.uint64(rng.seed & MASK64)


def run_sharded(fn: Callable[[int, int], np.ndarray], count: int, threads: int | None = None) -> np.ndarray:
    """Evaluate ``fn(offset, n)`` over contiguous shards and concatenate in order."""
    threads = max(1, min(threads or default_threads(), count or 1))
    if threads == 1 or count < 2:
        return fn(0, count)
    bounds = np.linspace(0, count, threads + 1).astype(int)
    shards = [(int(a), int(b - a)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda sh: fn(*sh), shards))
    return np.concatenate(parts)


@nb.njit(nogil=True, cache=True)
def _stream_uniforms(seed, stream0, count, tag, out):
    for s in range(count):
        out[s] = draw_uniform(derive_key(seed, np.uint64(stream0 + s), np.uint64(tag)), np.uint64(0))


# --- raw samplers ----------------------------------------------------------


def sample_dynamics(k: int, d: int, L: int, samples: int, rng: RngStream, *, threads: int | None = None,
                    count_nontrivial: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Final particle positions ``(samples, d+1)`` and non-trivial step counts."""
    if k < 1 or d < 0 or L < 0:
        raise ValueError("need k >= 1, d >= 0, L >= 0")
    seed = _seed(rng)

    def shard(offset: int, n: int) -> np.ndarray:
        pos = np.zeros((n, d + 1), dtype=np.int64)
        b = np.zeros(n, dtype=np.int64)
        kernels.dynamics_batch(seed, rng.stream_index + offset, n, k, d, L, count_nontrivial, pos, b)
        return np.column_stack([pos, b])

    out = run_sharded(shard, samples, threads)
    return out[:, :d + 1], out[:, d + 1]


def sample_lcs(k: int, n: int, n_prime: int, samples: int, rng: RngStream, *, threads: int | None = None) -> np.ndarray:
    seed = _seed(rng)

    def shard(offset: int, m: int) -> np.ndarray:
        out = np.zeros(m, dtype=np.int64)
        kernels.lcs_batch(seed, rng.stream_index + offset, m, k, n, n_prime, out)
        return out

    return run_sharded(shard, samples, threads)


def sample_lnds(k: int, lengths: np.ndarray, rng: RngStream, *, threads: int | None = None) -> np.ndarray:
    seed = _seed(rng)
    lengths = np.asarray(lengths, dtype=np.int64)

    def shard(offset: int, m: int) -> np.ndarray:
        out = np.zeros(m, dtype=np.int64)
        kernels.lnds_batch(seed, rng.stream_index + offset, m, k, lengths[offset:offset + m], out)
        return out

    return run_sharded(shard, lengths.size, threads)


def binomial_lengths(n: int, p: float, samples: int, rng: RngStream, tag: int = 3) -> np.ndarray:
    """``Binom(n, p)`` draws by inversion of one uniform per sample stream."""
    u = np.zeros(samples)
    _stream_uniforms(_seed(rng), rng.stream_index, samples, tag, u)
    return np.maximum(binom.ppf(u, n, p), 0).astype(np.int64)


def _timed(report: EstimateReport, started: float) -> EstimateReport:
    report.wall_time = time.perf_counter() - started
    log.info(report.summary())
    return report


# --- estimators --------------------------------------------------------------


def estimate_gamma(k: int, n: int, samples: int, rng: RngStream, *, threads: int | None = None) -> EstimateReport:
    """Mean of ``LCS(w, w') / n`` for independent uniform words of length ``n``."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < 1:
        raise ValueError("n must be positive")
    started = time.perf_counter()
    lcs = sample_lcs(k, n, n, samples, rng, threads=threads)
    extras = {}
    if k == 2:
        extras["reference_band"] = [0.788071, 0.826280]
    report = EstimateReport.from_values("gamma", {"k": k, "n": n}, lcs / n, rng.seed, rng.stream_index, **extras)
    return _timed(report, started)


def estimate_gamma_eps(k: int, eps: float, n: int, samples: int, rng: RngStream, *,
                       threads: int | None = None) -> EstimateReport:
    """Mean of ``LCS(w, w') / n`` with ``len(w') = floor((1 - eps) k n)``."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if n < 1:
        raise ValueError("n must be positive")
    started = time.perf_counter()
    n_prime = math.floor((1 - eps) * k * n)
    if n_prime < n:
        warnings.warn(f"longer word has length {n_prime} < n = {n}", RuntimeWarning, stacklevel=2)
    lcs = sample_lcs(k, n, n_prime, samples, rng, threads=threads)
    report = EstimateReport.from_values(
        "gamma_eps", {"k": k, "eps": eps, "n": n, "n_prime": n_prime}, lcs / n, rng.seed, rng.stream_index,
        window=[1 - 8 * eps**2, 1 - eps**2 / 72], floor=1 - eps,
    )
    return _timed(report, started)


def estimate_drift(k: int, d: int, L: int, samples: int, rng: RngStream, *,
                   threads: int | None = None) -> EstimateReport:
    """Mean of ``P_d(L) - P_0(L)``; extras carry ``P_0(L)`` against its exact mean ``L/k``."""
    if k < 2:
        raise ValueError("k must be at least 2")
    started = time.perf_counter()
    pos, _ = sample_dynamics(k, d, L, samples, rng, threads=threads)
    p0 = pos[:, 0].astype(np.float64)
    p0_se = float(p0.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    report = EstimateReport.from_values(
        "drift", {"k": k, "d": d, "L": L}, pos[:, d] - pos[:, 0], rng.seed, rng.stream_index,
        p0_mean=float(p0.mean()), p0_stderr=p0_se, p0_target=L / k,
        upper_bound=d * math.sqrt(2 * L / k) + d, asymptotic=2 * math.sqrt(d * L / k),
    )
    return _timed(report, started)


def estimate_nontrivial_tail(k: int, d: int, L: int, samples: int, rng: RngStream, *,
                             threads: int | None = None) -> EstimateReport:
    """Frequency of ``|B| >= 6 d^2 L / k`` (steps with a non-trivial expectant partition)."""
    started = time.perf_counter()
    _, b = sample_dynamics(k, d, L, samples, rng, threads=threads, count_nontrivial=True)
    threshold = 6 * d * d * L / k
    bound = min(1.0, 4 * d * d * L * math.exp(-math.sqrt(L) * k ** -1.5))
    report = EstimateReport.from_values(
        "nontrivial_tail", {"k": k, "d": d, "L": L}, (b >= threshold).astype(float), rng.seed, rng.stream_index,
        threshold=threshold, bound=bound, mean_nontrivial=float(b.mean()), max_nontrivial=int(b.max(initial=0)),
    )
    return _timed(report, started)


def concat_parameters(k: int, eps: float, d: int, alpha: float, L0: int, n: int) -> tuple[int, int]:
    """Block length and block count of the concatenation construction (both floored)."""
    limit = min(1 / 20, alpha * math.sqrt(k / (2 * L0)))
    if not 0 < eps < limit:
        raise ValueError(f"eps={eps} outside (0, {limit:.6g}) required by the construction")
    L = math.floor((1 - 2 * eps) ** 2 * alpha**2 * k / eps**2)
    M = math.floor((1 - eps) * k * n / L)
    if L < 1 or M < 1:
        raise ValueError(f"degenerate construction: L={L}, M={M}; increase n")
    return L, M


def _var_stderr(x: np.ndarray) -> float:
    n = x.size
    c = x - x.mean()
    m4 = float((c**4).mean())
    s2 = float((c**2).mean())
    return math.sqrt(max(m4 - s2 * s2, 0.0) / n)


def estimate_concat_lower(k: int, eps: float, d: int, alpha: float, L0: int, n: int, samples: int,
                          rng: RngStream, *, threads: int | None = None) -> EstimateReport:
    """Greedy block construction: ``Y = Y_1 + ... + Y_M`` with ``Y_r`` the longest
    ``d``-almost contained piece of ``w`` against block ``r`` of ``w'``."""
    L, M = concat_parameters(k, eps, d, alpha, L0, n)
    started = time.perf_counter()
    seed = _seed(rng)

    def shard(offset: int, m: int) -> np.ndarray:
        out = np.zeros((m, M), dtype=np.int64)
        kernels.concat_blocks_batch(seed, rng.stream_index + offset, m, k, d, L, M, out)
        return out

    blocks = run_sharded(shard, samples, threads).astype(np.float64)
    y = blocks.sum(axis=1)
    var_y = float(y.var(ddof=1))
    col_var = blocks.var(axis=0, ddof=1)
    sum_var = float(col_var.sum())
    diff_se = math.sqrt(_var_stderr(y) ** 2 + sum(_var_stderr(blocks[:, r]) ** 2 for r in range(M)))
    hit = (y >= n).astype(float)
    report = EstimateReport.from_values(
        "concat_Y", {"k": k, "eps": eps, "d": d, "alpha": alpha, "L0": L0, "n": n, "L": L, "M": M},
        y, rng.seed, rng.stream_index,
        expected_lower=M * (L / k + alpha * math.sqrt(L / k)),
        pr_y_ge_n=float(hit.mean()), pr_y_ge_n_stderr=float(math.sqrt(hit.var() / samples)),
        lcs_lower=n - d * M, var_y=var_y, sum_var_blocks=sum_var, var_diff_stderr=diff_se,
    )
    return _timed(report, started)


def estimate_lnds_mean(k: int, n: int, samples: int, rng: RngStream, *, threads: int | None = None) -> EstimateReport:
    """Mean LNDS of ``w ~ [k]^n`` and the statistic ``(mean - n/k) / (2 sqrt n)``."""
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    started = time.perf_counter()
    values = sample_lnds(k, np.full(samples, n, dtype=np.int64), rng, threads=threads)
    report = EstimateReport.from_values("lnds", {"k": k, "n": n}, values, rng.seed, rng.stream_index)
    scale = 2 * math.sqrt(n)
    report.extras.update(normalized=(report.mean - n / k) / scale, normalized_stderr=report.stderr / scale)
    return _timed(report, started)


def estimate_lnds_binomial(k: int, n: int, p: float, samples: int, rng: RngStream, *,
                           threads: int | None = None) -> EstimateReport:
    """Mean LNDS of ``w ~ [k]^m`` with ``m ~ Binom(n, p)``."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    started = time.perf_counter()
    lengths = binomial_lengths(n, p, samples, rng)
    values = sample_lnds(k, lengths, rng, threads=threads)
    report = EstimateReport.from_values("lnds_binomial", {"k": k, "n": n, "p": p}, values, rng.seed, rng.stream_index)
    scale = 2 * math.sqrt(p * n)
    report.extras.update(
        normalized=(report.mean - p * n / k) / scale, normalized_stderr=report.stderr / scale,
        length_mean=float(lengths.mean()), length_stderr=float(lengths.std(ddof=1) / math.sqrt(samples)),
    )
    return _timed(report, started)
