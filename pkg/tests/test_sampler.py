import math

import numpy as np
import pytest
from scipy.stats import chisquare

from measpec.model import potential_from_matrix
from measpec.oracle import x0_dimension
from measpec.pressure import pressure_derivative
from measpec.sampler import (
    REPORT_FIELDS,
    chain_stream,
    cylinder_log_prob,
    dyadic_chains,
    exact_pair_means,
    kernel_at,
    lln_experiment,
    multiple_birkhoff_average,
    sample_prefix,
    sample_run,
    sample_words,
)


@pytest.mark.parametrize("n", [1, 2, 3, 10, 64, 1000, 4096])
def test_chains_partition(n):
    chains = dyadic_chains(n).chains
    flat = sorted(k for c in chains.values() for k in c)
    assert flat == list(range(1, n + 1))
    for i, c in chains.items():
        assert i % 2 == 1 and c[0] == i
        assert all(b == 2 * a for a, b in zip(c, c[1:]))
        assert 2 * c[-1] > n


def test_chains_reject_zero():
    with pytest.raises(ValueError):
        dyadic_chains(0)


def test_kernel_example2(ex2):
    k = kernel_at(ex2, math.log(2))
    assert k.pi == pytest.approx([0.4450418679126284, 0.5549581320873717], abs=1e-12)
    assert k.p == pytest.approx(np.array([[0.44504186791, 0.55495813209], [0.28620826422, 0.71379173578]]), abs=1e-10)


def test_kernel_example1_uniform(ex1):
    # t0 = t1 so the chain is i.i.d. with bias e^{s phi} / (2 cosh s)
    k = kernel_at(ex1, 1.0)
    assert k.pi == pytest.approx([0.5, 0.5], abs=1e-14)
    e = math.exp(1.0)
    assert k.p == pytest.approx(np.array([[e, 1 / e], [1 / e, e]]) / (e + 1 / e), abs=1e-12)


def test_kernel_stochastic(rand_models):
    for mdl in rand_models:
        for s in np.linspace(-20, 20, 9):
            k = kernel_at(mdl, s)
            assert abs(k.pi.sum() - 1) <= 1e-12
            assert np.max(np.abs(k.p.sum(axis=1) - 1)) <= 1e-12
            assert np.all(np.isfinite(k.log_p))


def test_uniform_marginals_at_zero(ex2):
    k = kernel_at(ex2, 0.0)
    words = sample_words(k, 12, 20000, seed=5)
    for col in range(12):
        counts = np.bincount(words[:, col], minlength=2)
        assert chisquare(counts).pvalue > 1e-4


def test_sampling_deterministic(ex2):
    k = kernel_at(ex2, 1.0)
    a = sample_words(k, 100, 50, seed=11)
    assert np.array_equal(a, sample_words(k, 100, 50, seed=11))
    assert not np.array_equal(a, sample_words(k, 100, 50, seed=12))
    assert np.array_equal(sample_prefix(k, 100, 7), sample_prefix(k, 100, 7))


def test_chain_stream_independent_of_n(ex2):
    # coordinates of chain i only depend on (seed, i), so prefixes agree at fixed depth
    k = kernel_at(ex2, 0.5)
    short, long = sample_prefix(k, 64, 3), sample_prefix(k, 128, 3)
    assert np.array_equal(short, long[:64])
    assert chain_stream(3, 5).random() == chain_stream(3, 5).random()
    assert chain_stream(3, 5).random() != chain_stream(3, 7).random()


def test_x0_concentration(ex2):
    k = kernel_at(ex2, -1e6)
    words = sample_words(k, 256, 200, seed=0)
    kk = np.arange(1, 129)
    assert not np.any(words[:, kk - 1] * words[:, 2 * kk - 1])
    lp = np.array([cylinder_log_prob(k, w) for w in words])
    # local dimension approaches dim X0 once the word is long
    assert np.mean(-lp / (256 * math.log(2))) == pytest.approx(x0_dimension(), abs=0.05)


def test_cylinder_example2(ex2):
    k = kernel_at(ex2, math.log(2))
    assert cylinder_log_prob(k, [1, 1]) == pytest.approx(-0.9260266515294822, abs=1e-12)
    assert math.exp(cylinder_log_prob(k, [1, 1])) == pytest.approx(0.3961245283903227, abs=1e-12)


def test_cylinder_marginalisation(rand_models):
    for mdl in rand_models[:4]:
        k = kernel_at(mdl, 0.7)
        rng = np.random.default_rng(0)
        w = list(rng.integers(0, mdl.m, size=5))
        parts = [math.exp(cylinder_log_prob(k, w + [a])) for a in range(mdl.m)]
        assert math.fsum(parts) == pytest.approx(math.exp(cylinder_log_prob(k, w)), rel=1e-12)


def test_cylinder_rejects_empty(ex1):
    with pytest.raises(ValueError):
        cylinder_log_prob(kernel_at(ex1, 0.0), [])


def test_average_examples(ex1, ex2):
    # pairs (1,2), (2,4): x = 0 1 1 1
    assert multiple_birkhoff_average([0, 1, 1, 1], ex2) == pytest.approx(0.5)
    assert multiple_birkhoff_average([0, 1, 1, 1], ex1) == pytest.approx(0.0)
    assert multiple_birkhoff_average([1, 1, 0, 1], ex1) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        multiple_birkhoff_average([1], ex1)


def test_local_dim_one_at_zero(ex2):
    k = kernel_at(ex2, 0.0)
    run = sample_run(ex2, k, 512, seed=1)
    assert run.local_dim == pytest.approx(1.0, abs=1e-12)


def test_exact_pair_means_approach_pprime(ex2, rand_models):
    for mdl in [ex2] + rand_models[:3]:
        for s in (-1.0, 0.5):
            k = kernel_at(mdl, s)
            n = 2**14
            means = exact_pair_means(mdl, k, n)
            assert means.mean() == pytest.approx(pressure_derivative(mdl, s).Pprime, abs=2e-3)


def test_exact_pair_means_enumeration(ex2):
    import itertools

    k = kernel_at(ex2, 0.3)
    n = 8
    words = list(itertools.product(range(2), repeat=n))
    probs = np.array([math.exp(cylinder_log_prob(k, w)) for w in words])
    W = np.array(words)
    brute = [probs @ ex2.phi[W[:, j - 1], W[:, 2 * j - 1]] for j in range(1, n // 2 + 1)]
    assert exact_pair_means(ex2, k, n // 2) == pytest.approx(brute, abs=1e-13)


def test_lln_small(ex2):
    stats = lln_experiment(ex2, 1.0, 2**12, range(4))
    assert abs(stats.mean_avg - stats.expected_Pprime) < 0.05
    assert abs(stats.mean_local_dim - stats.expected_dim) < 0.05
    assert set(stats.report()) == set(REPORT_FIELDS)
    assert len(stats.runs) == 4 and all(r.word.size == 2**13 for r in stats.runs)


@pytest.mark.parametrize("n", [1000, 2**9, 3 * 2**10])
def test_lln_rejects_bad_n(ex2, n):
    with pytest.raises(ValueError):
        lln_experiment(ex2, 1.0, n, [0])


def test_lln_needs_seed(ex2):
    with pytest.raises(ValueError):
        lln_experiment(ex2, 1.0, 2**10, [])


def test_degenerate_transition():
    # phi = -inf-like: huge negative potential on one edge still samples
    mdl = potential_from_matrix([[0.0, -50.0], [0.0, 0.0]])
    k = kernel_at(mdl, 10.0)
    assert np.max(np.abs(k.p.sum(axis=1) - 1)) <= 1e-12
    sample_words(k, 64, 10, seed=0)
