"""Positive solution of the nonlinear transfer system.

For a pair potential ``phi`` and a real parameter ``s`` we look for ``t > 0``
with ``t_i**2 = sum_j exp(s*phi[i, j]) * t_j``. Working with ``l = log t``
the system reads ``l = G(l)`` where

    G(l)_i = 0.5 * logsumexp_j(s*phi[i, j] + l_j).

Log-sum-exp is 1-Lipschitz in the sup norm, so ``G`` contracts with factor
1/2 and plain fixed-point iteration converges from any start.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import SolverFailure
from .model import PotentialMatrix

__all__ = [
    "TransferSolution",
    "solve_transfer",
    "transfer_map",
    "iterate_transfer",
    "noise_floor",
    "DEFAULT_TOL",
    "MAX_ITER",
]

DEFAULT_TOL = 1e-13
MAX_ITER = 200
_EPS = np.finfo(float).eps
# a step ratio is only trusted to ~1e-9 once the previous step dwarfs rounding
_CERTIFY_FACTOR = 1e9


def _lse_rows(a: np.ndarray) -> np.ndarray:
    top = a.max(axis=1)
    finite = np.isfinite(top)
    shift = np.where(finite, top, 0.0)
    with np.errstate(divide="ignore"):
        return shift + np.log(np.exp(a - shift[:, None]).sum(axis=1))


def transfer_map(sphi: np.ndarray, log_t: np.ndarray) -> np.ndarray:
    """One application of ``G`` with ``sphi = s * phi`` precomputed."""
    return 0.5 * _lse_rows(sphi + log_t[None, :])


def noise_floor(log_t: np.ndarray) -> float:
    """Absolute rounding level of one evaluation of ``G`` near ``log_t``."""
    return 16.0 * _EPS * max(1.0, float(np.max(np.abs(log_t))))


@dataclass(frozen=True)
class TransferSolution:
    """Fixed point of the log-domain transfer map.

    ``contraction`` is the largest observed ratio of successive step sizes
    among steps well above rounding noise (0.0 when the start was already
    within noise of the fixed point).
    """

    s: float
    log_t: np.ndarray
    iterations: int
    sup_residual: float
    contraction: float

    @property
    def t(self) -> np.ndarray:
        return np.exp(self.log_t)


def _initial_iterate(model: PotentialMatrix, s: float) -> np.ndarray:
    return np.full(model.m, math.log(model.m) + 0.5 * s * float(model.phi.mean()))


def solve_transfer(
    model: PotentialMatrix,
    s: float,
    tol: float = DEFAULT_TOL,
    log_t0: Optional[np.ndarray] = None,
    max_iter: int = MAX_ITER,
) -> TransferSolution:
    """Solve ``t_i**2 = sum_j exp(s*phi[i,j]) t_j`` for the positive vector ``t``.

    Parameters
    ----------
    model : PotentialMatrix
    s : float
        Must be finite.
    tol : float
        Target sup-norm defect of the returned ``log_t``. When the solution is
        large in magnitude the target is raised to the rounding floor of
        double precision at that scale.
    log_t0 : ndarray, optional
        Starting iterate; the fixed point does not depend on it.

    Raises
    ------
    SolverFailure
        If the iteration cap is hit or a step violates the contraction bound
        by more than rounding noise. Both indicate a bug, not bad input.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if not math.isfinite(s):
        raise ValueError(f"s must be finite, got {s}")
    sphi = s * model.phi
    cur = _initial_iterate(model, s) if log_t0 is None else np.array(log_t0, dtype=float)
    if cur.shape != (model.m,) or not np.all(np.isfinite(cur)):
        raise ValueError("log_t0 must be a finite vector of length m")

    prev_step = math.inf
    ratio = 0.0
    for it in range(1, max_iter + 1):
        new = transfer_map(sphi, cur)
        step = float(np.max(np.abs(new - cur)))
        floor = noise_floor(new)
        if step > 0.5 * prev_step + 2.0 * floor:
            raise SolverFailure(
                f"transfer iteration at s={s} broke the 1/2-contraction bound "
                f"at step {it}: {step:.3e} after {prev_step:.3e}"
            )
        if prev_step > _CERTIFY_FACTOR * floor:
            ratio = max(ratio, step / prev_step)
        cur = new
        if step <= max(tol, floor):
            residual = float(np.max(np.abs(transfer_map(sphi, cur) - cur)))
            return TransferSolution(
                s=float(s),
                log_t=cur,
                iterations=it,
                sup_residual=residual,
                contraction=ratio,
            )
        prev_step = step
    raise SolverFailure(
        f"transfer iteration at s={s} did not reach tol={tol:g} in {max_iter} steps"
    )


def iterate_transfer(model: PotentialMatrix, s: float, log_t0, n_steps: int) -> List[np.ndarray]:
    """Return the first ``n_steps`` iterates of ``G`` starting at ``log_t0``."""
    sphi = s * model.phi
    out = [np.array(log_t0, dtype=float)]
    for _ in range(n_steps):
        out.append(transfer_map(sphi, out[-1]))
    return out
