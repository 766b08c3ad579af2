"""Independent checks: closed forms for the two binary examples and brute force.

Nothing here calls the transfer solver. Example 1 is ``f1 = f2 = 2 x_1 - 1``
(``f = (-1, 1)``), Example 2 is ``f1 = f2 = x_1`` (``f = (0, 1)``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .model import PotentialMatrix, potential_from_factors

__all__ = [
    "binary_entropy",
    "example1_model",
    "example2_model",
    "example1_t",
    "example1_pressure",
    "example1_dim",
    "example1_finv",
    "example2_t0",
    "example2_finv",
    "x0_dimension",
    "finite_difference",
    "CylinderReport",
    "exhaustive_cylinder_check",
    "MAX_ENUMERATION",
]

MAX_ENUMERATION = 2**20


def binary_entropy(x: float) -> float:
    """Entropy in bits of a coin with bias ``x``; ``H(0) = H(1) = 0``."""
    if x < 0.0 or x > 1.0:
        raise ValueError(f"bias must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def example1_model() -> PotentialMatrix:
    return potential_from_factors([-1.0, 1.0], [-1.0, 1.0])


def example2_model() -> PotentialMatrix:
    return potential_from_factors([0.0, 1.0], [0.0, 1.0])


def example1_t(s: float) -> float:
    """Both components of the transfer solution for Example 1: ``2 cosh s``."""
    return 2.0 * math.cosh(s)


def example1_pressure(s: float) -> float:
    return math.log(4.0 * math.cosh(s))


def example1_dim(alpha: float) -> float:
    """``1/2 + H((1 + alpha)/2) / 2`` on ``[-1, 1]``."""
    if not -1.0 <= alpha <= 1.0:
        raise ValueError(f"Example 1 spectrum is defined on [-1, 1], got {alpha}")
    return 0.5 + 0.5 * binary_entropy((1.0 + alpha) / 2.0)


def example1_finv(alpha: float) -> Optional[float]:
    """``H((1 + sqrt(alpha))/2)`` for ``0 <= alpha <= 1``, otherwise ``None``."""
    if alpha < 0.0 or alpha > 1.0:
        return None
    return binary_entropy((1.0 + math.sqrt(alpha)) / 2.0)


def example2_finv(alpha: float) -> Optional[float]:
    if alpha < 0.0 or alpha > 1.0:
        return None
    return binary_entropy(math.sqrt(alpha))


def _cubic(x: float, c: float) -> float:
    return x**3 - 2.0 * x**2 - c * x + c


def example2_t0(s: float) -> float:
    """Root of ``x^3 - 2x^2 - (e^s - 1)x + (e^s - 1)`` on the branch through ``t0(0) = 2``.

    On ``x > 1`` the cubic has exactly one root for every ``e^s - 1 > -1``
    (``x^2 (x-2)/(x-1)`` is increasing there) and it equals 1 at ``x = 1``
    with value ``-1``, so the bracket below always changes sign. ``s = -inf``
    gives the limiting root of ``x (x-1)^2 = 1``.
    """
    c = math.expm1(s) if math.isfinite(s) else (-1.0 if s < 0 else math.inf)
    if not math.isfinite(c):
        raise ValueError("s = +inf has no finite root")
    # the root increases with c and is 2 at c = 0, so 3 bounds it for s <= 0
    hi = 3.0 + math.exp(max(s, 0.0)) if math.isfinite(s) else 3.0
    return brentq(_cubic, 1.0 + 1e-12, hi, args=(c,), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=400)


def x0_dimension() -> float:
    """``log2 t0`` where ``t0 (t0 - 1)^2 = 1``, from the eigen-solver of the companion matrix."""
    roots = np.roots([1.0, -2.0, 1.0, -1.0])
    real = [r.real for r in roots if abs(r.imag) < 1e-12]
    assert len(real) == 1
    return math.log2(real[0])


def finite_difference(fn: Callable[[float], float], s: float, h: float = 1e-5) -> float:
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    return (fn(s + h) - fn(s - h)) / (2.0 * h)


@dataclass(frozen=True)
class CylinderReport:
    """Brute-force comparison of cylinder masses with Monte Carlo samples.

    ``pair_mean_error`` is the largest gap between exact and sampled
    ``E[phi(x_k, x_2k)]`` over ``k <= n // 2``; ``tv_distance`` compares the
    exact law of the length-``n`` word with the empirical one.
    """

    m: int
    n: int
    s: float
    total_mass: float
    mass_error: float
    exact_pair_means: np.ndarray
    sampled_pair_means: np.ndarray
    pair_mean_error: float
    tv_distance: float
    n_samples: int


def exhaustive_cylinder_check(
    model: PotentialMatrix,
    s: float,
    n: int,
    n_samples: int = 100_000,
    seed: int = 0,
) -> CylinderReport:
    """Enumerate all ``m**n`` cylinders of the product measure at ``s``."""
    # local imports keep this module free of engine dependencies at import time
    from .sampler import cylinder_log_prob, kernel_at, sample_words

    if model.m**n > MAX_ENUMERATION:
        raise ValueError(f"m**n = {model.m**n} exceeds the enumeration limit {MAX_ENUMERATION}")
    kernel = kernel_at(model, s)
    words = np.array(list(itertools.product(range(model.m), repeat=n)), dtype=np.int64)
    probs = np.array([math.exp(cylinder_log_prob(kernel, w)) for w in words])
    total = math.fsum(probs)

    half = n // 2
    k = np.arange(1, half + 1)
    pair_vals = model.phi[words[:, k - 1], words[:, 2 * k - 1]] if half else np.zeros((len(words), 0))
    exact_means = probs @ pair_vals

    samples = sample_words(kernel, n, n_samples, seed)
    sampled_means = model.phi[samples[:, k - 1], samples[:, 2 * k - 1]].mean(axis=0) if half else np.zeros(0)
    codes = samples @ (model.m ** np.arange(n - 1, -1, -1))
    freq = np.bincount(codes, minlength=model.m**n) / n_samples
    return CylinderReport(
        m=model.m,
        n=n,
        s=float(s),
        total_mass=total,
        mass_error=abs(total - 1.0),
        exact_pair_means=exact_means,
        sampled_pair_means=sampled_means,
        pair_mean_error=float(np.max(np.abs(exact_means - sampled_means))) if half else 0.0,
        tv_distance=0.5 * float(np.abs(freq - probs).sum()),
        n_samples=n_samples,
    )
