"""Telescopic product measure on the dyadic chains.

The positive integers split into chains ``{i, 2i, 4i, ...}`` with ``i`` odd.
Each chain carries an independent copy of the Markov measure with initial
law ``pi_i = t_i / sum(t)`` and transitions
``p[i, j] = exp(s phi[i, j]) t_j / t_i**2``. Along a chain the pairs
``(x_k, x_{2k})`` are consecutive, so the multiple average of ``phi``
becomes a sum of ordinary Markov additive functionals.

Randomness: the stream for chain ``i`` is a Philox generator keyed by
``(seed, i)``, so a word does not depend on the order chains are visited.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .model import PotentialMatrix
from .pressure import derivative_from_solution, pressure_from_solution
from .transfer import DEFAULT_TOL, TransferSolution, solve_transfer

__all__ = [
    "MarkovKernel",
    "ChainDecomposition",
    "SampleRun",
    "LLNStatistics",
    "kernel_from_solution",
    "kernel_at",
    "dyadic_chains",
    "chain_stream",
    "sample_words",
    "sample_prefix",
    "cylinder_log_prob",
    "multiple_birkhoff_average",
    "sample_run",
    "lln_experiment",
    "exact_pair_means",
]

_MASK64 = (1 << 64) - 1
REPORT_FIELDS = ("s", "n", "seeds", "mean_avg", "std_avg", "mean_local_dim",
                 "expected_Pprime", "expected_dim")


@dataclass(frozen=True)
class MarkovKernel:
    s: float
    pi: np.ndarray
    p: np.ndarray
    log_pi: np.ndarray
    log_p: np.ndarray

    @property
    def m(self) -> int:
        return self.pi.size


def kernel_from_solution(model: PotentialMatrix, solution: TransferSolution) -> MarkovKernel:
    """Initial law and transition matrix built from a transfer solution.

    Log-probabilities are formed directly from ``log t`` so transitions that
    underflow to zero still have finite logs.
    """
    lt = solution.log_t
    top = lt.max()
    log_pi = lt - (top + math.log(float(np.exp(lt - top).sum())))
    log_p = solution.s * model.phi + lt[None, :] - 2.0 * lt[:, None]
    return MarkovKernel(s=solution.s, pi=np.exp(log_pi), p=np.exp(log_p), log_pi=log_pi, log_p=log_p)


def kernel_at(model: PotentialMatrix, s: float, tol: float = DEFAULT_TOL) -> MarkovKernel:
    return kernel_from_solution(model, solve_transfer(model, s, tol))


@dataclass(frozen=True)
class ChainDecomposition:
    """Chains ``(i, 2i, 4i, ...)`` truncated at ``n``, keyed by odd ``i``."""

    n: int
    chains: Dict[int, Tuple[int, ...]]


def dyadic_chains(n: int) -> ChainDecomposition:
    """Split ``{1, ..., n}`` into dyadic chains.

    >>> dyadic_chains(10).chains[3]
    (3, 6)
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    chains = {}
    for i in range(1, n + 1, 2):
        idx = []
        k = i
        while k <= n:
            idx.append(k)
            k *= 2
        chains[i] = tuple(idx)
    return ChainDecomposition(n=n, chains=chains)


def chain_stream(seed: int, chain: int) -> np.random.Generator:
    """Generator dedicated to one chain; depends only on ``(seed, chain)``."""
    return np.random.Generator(np.random.Philox(key=[seed & _MASK64, chain]))


def _inverse_cdf(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    # cum[..., -1] may round below 1; clamp so every u maps to a symbol
    idx = (u[..., None] >= cum).sum(axis=-1)
    return np.minimum(idx, cum.shape[-1] - 1)


def sample_words(kernel: MarkovKernel, n: int, size: int, seed: int) -> np.ndarray:
    """Draw ``size`` independent words of length ``n`` under the product measure.

    Returns an integer array of shape ``(size, n)``; column ``k - 1`` holds
    coordinate ``x_k``. Chain ``i`` consumes ``size * len(chain)`` uniforms
    from its own stream, so the result is a deterministic function of
    ``(kernel, n, size, seed)``.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    m = kernel.m
    cum_pi = np.cumsum(kernel.pi)
    cum_p = np.cumsum(kernel.p, axis=1)
    n_chains = (n + 1) // 2
    depth = n.bit_length()  # longest chain is that of 1
    # uniforms[c, r, d]: chain c (odd index 2c+1), sample r, depth d
    u = np.empty((n_chains, size, depth))
    lengths = np.empty(n_chains, dtype=int)
    for c in range(n_chains):
        i = 2 * c + 1
        length = (n // i).bit_length()
        lengths[c] = length
        u[c, :, :length] = chain_stream(seed, i).random((size, length))
    words = np.empty((size, n), dtype=np.int64)
    odd = np.arange(1, n + 1, 2)
    cur = _inverse_cdf(cum_pi, u[:, :, 0].T)  # (size, n_chains)
    words[:, odd - 1] = cur
    for d in range(1, depth):
        live = np.flatnonzero(lengths > d)
        if live.size == 0:
            break
        rows = cur[:, live]
        nxt = _inverse_cdf(cum_p[rows], u[live, :, d].T)
        words[:, odd[live] * (1 << d) - 1] = nxt
        cur = cur.copy()
        cur[:, live] = nxt
    assert words.min() >= 0 and words.max() < m
    return words


def sample_prefix(kernel: MarkovKernel, n: int, seed: int) -> np.ndarray:
    """One word ``(x_1, ..., x_n)`` drawn under the product measure."""
    return sample_words(kernel, n, 1, seed)[0]


def cylinder_log_prob(kernel: MarkovKernel, word) -> float:
    """Log-mass of the cylinder ``[x_1 ... x_n]``."""
    w = np.asarray(word, dtype=np.int64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("word must be a non-empty sequence of symbols")
    n = w.size
    ks = np.arange(1, n + 1)
    odd = ks % 2 == 1
    total = kernel.log_pi[w[odd]].sum()
    even = ks[~odd]
    total += kernel.log_p[w[even // 2 - 1], w[even - 1]].sum()
    return float(total)


def multiple_birkhoff_average(word, model: PotentialMatrix) -> float:
    """``(1/n) sum_{k<=n} phi(x_k, x_2k)`` with ``n = len(word) // 2``."""
    w = np.asarray(word, dtype=np.int64)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("word must have at least two symbols")
    n = w.size // 2
    k = np.arange(1, n + 1)
    return float(model.phi[w[k - 1], w[2 * k - 1]].mean())


@dataclass(frozen=True)
class SampleRun:
    seed: int
    n: int
    word: np.ndarray = field(repr=False)
    avg: float
    log_prob: float
    local_dim: float


def sample_run(model: PotentialMatrix, kernel: MarkovKernel, n: int, seed: int) -> SampleRun:
    """Sample a word of length ``n`` and record its average and local dimension."""
    word = sample_prefix(kernel, n, seed)
    lp = cylinder_log_prob(kernel, word)
    return SampleRun(
        seed=seed,
        n=n,
        word=word,
        avg=multiple_birkhoff_average(word, model),
        log_prob=lp,
        local_dim=-lp / (n * math.log(model.m)),
    )


@dataclass(frozen=True)
class LLNStatistics:
    s: float
    n: int
    seeds: List[int]
    mean_avg: float
    std_avg: float
    mean_local_dim: float
    std_local_dim: float
    expected_Pprime: float
    expected_dim: float
    runs: List[SampleRun] = field(repr=False, default_factory=list)

    def report(self) -> dict:
        return {k: getattr(self, k) for k in REPORT_FIELDS}

    def to_json(self) -> str:
        return json.dumps(self.report(), indent=2)


def lln_experiment(
    model: PotentialMatrix,
    s: float,
    n: int,
    seeds: Sequence[int],
    tol: float = DEFAULT_TOL,
) -> LLNStatistics:
    """Average and local dimension over several sampled words.

    ``n`` is the number of pairs ``(k, 2k)`` and must be a power of two of
    at least ``2**10``; each word has length ``2n``.
    """
    if n < 2**10 or n & (n - 1):
        raise ValueError(f"n must be a power of two >= 1024, got {n}")
    seeds = [int(x) for x in seeds]
    if not seeds:
        raise ValueError("need at least one seed")
    sol = solve_transfer(model, s, tol)
    kernel = kernel_from_solution(model, sol)
    P = pressure_from_solution(sol)
    dP = derivative_from_solution(model, sol)
    runs = [sample_run(model, kernel, 2 * n, seed) for seed in seeds]
    avgs = np.array([r.avg for r in runs])
    dims = np.array([r.local_dim for r in runs])
    ddof = 1 if len(runs) > 1 else 0
    return LLNStatistics(
        s=float(s),
        n=n,
        seeds=seeds,
        mean_avg=float(avgs.mean()),
        std_avg=float(avgs.std(ddof=ddof)),
        mean_local_dim=float(dims.mean()),
        std_local_dim=float(dims.std(ddof=ddof)),
        expected_Pprime=dP,
        expected_dim=(P - s * dP) / (2.0 * math.log(model.m)),
        runs=runs,
    )


def exact_pair_means(model: PotentialMatrix, kernel: MarkovKernel, n: int) -> np.ndarray:
    """Exact ``E[phi(x_k, x_2k)]`` for ``k = 1..n`` under the product measure.

    Only the depth of ``k`` in its chain matters: ``x_k`` has law
    ``pi p^d`` with ``d`` the 2-adic valuation of ``k``.
    """
    pair = (kernel.p * model.phi).sum(axis=1)
    max_depth = max(1, n.bit_length())
    by_depth = np.empty(max_depth)
    law = kernel.pi.copy()
    for d in range(max_depth):
        by_depth[d] = law @ pair
        law = law @ kernel.p
    k = np.arange(1, n + 1)
    val = (k & -k).astype(np.int64)
    depths = np.log2(val).astype(int)
    return by_depth[depths]
