"""Pressure function, its derivative and its asymptotic slopes.

``P(s) = log sum_j t_j(s)`` where ``t(s)`` solves the transfer system. The
derivative comes from differentiating the fixed-point equation; the slopes at
``s -> -inf`` and ``s -> +inf`` come from the min-plus and max-plus shadows
of the transfer map.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ConstantPotentialError, SolverFailure
from .model import PotentialMatrix
from .transfer import DEFAULT_TOL, TransferSolution, solve_transfer

__all__ = [
    "PressurePoint",
    "EndpointSlopes",
    "pressure",
    "pressure_derivative",
    "pressure_from_solution",
    "derivative_from_solution",
    "endpoint_slopes",
    "extremal_cycle",
    "tropical_fixed_point",
]


@dataclass(frozen=True)
class PressurePoint:
    s: float
    P: float
    Pprime: Optional[float] = None


@dataclass(frozen=True)
class EndpointSlopes:
    """Asymptotic slopes ``P'(-inf)``, ``P'(+inf)`` with supporting data."""

    slope_minus: float
    slope_plus: float
    tau_minus: np.ndarray
    tau_plus: np.ndarray
    attains_min: bool
    attains_max: bool
    witness_min: Optional[Tuple[int, ...]]
    witness_max: Optional[Tuple[int, ...]]


def _lse(v: np.ndarray) -> float:
    top = float(v.max())
    return top + math.log(float(np.exp(v - top).sum()))


def _require_nonconstant(model: PotentialMatrix) -> None:
    if model.is_constant:
        raise ConstantPotentialError(
            f"potential is constant (phi == {model.alpha_min:g}); the pressure is affine "
            "and the spectrum degenerates to a single point"
        )


def pressure_from_solution(solution: TransferSolution) -> float:
    return _lse(solution.log_t)


def derivative_from_solution(model: PotentialMatrix, solution: TransferSolution) -> float:
    """``P'(s)`` from the linearised fixed-point equation at ``solution``."""
    a = solution.s * model.phi + solution.log_t[None, :]
    w = np.exp(a - a.max(axis=1, keepdims=True))
    w /= w.sum(axis=1, keepdims=True)
    rhs = 0.5 * (w * model.phi).sum(axis=1)
    dlog_t = np.linalg.solve(np.eye(model.m) - 0.5 * w, rhs)
    v = np.exp(solution.log_t - solution.log_t.max())
    v /= v.sum()
    return float(v @ dlog_t)


def pressure(model: PotentialMatrix, s: float, tol: float = DEFAULT_TOL) -> PressurePoint:
    """``P(s)`` only; ``Pprime`` is left unset."""
    sol = solve_transfer(model, s, tol)
    return PressurePoint(s=float(s), P=pressure_from_solution(sol))


def pressure_derivative(
    model: PotentialMatrix,
    s: float,
    tol: float = DEFAULT_TOL,
    allow_constant: bool = False,
) -> PressurePoint:
    """``P(s)`` and ``P'(s)``.

    ``allow_constant`` lifts the non-constant guard; for ``phi == c`` the
    result is then ``P = 2 log m + c s`` and ``P' = c``.
    """
    if not allow_constant:
        _require_nonconstant(model)
    sol = solve_transfer(model, s, tol)
    return PressurePoint(
        s=float(s), P=pressure_from_solution(sol), Pprime=derivative_from_solution(model, sol)
    )


def tropical_fixed_point(phi: np.ndarray, which: str, tol: float = 2e-16, max_iter: int = 400) -> np.ndarray:
    """Fixed point of ``tau_i = 0.5 * max_j(phi[i,j] + tau_j)`` (or min for ``which='min'``).

    Another 1/2-contraction in the sup norm; iterated from zero.
    """
    reduce = np.max if which == "max" else np.min
    tau = np.zeros(phi.shape[0])
    scale = max(1.0, float(np.max(np.abs(phi))))
    for _ in range(max_iter):
        new = 0.5 * reduce(phi + tau[None, :], axis=1)
        step = float(np.max(np.abs(new - tau)))
        tau = new
        if step <= tol * scale:
            return tau
    raise SolverFailure(f"{which}-plus fixed point did not converge in {max_iter} steps")


def extremal_cycle(model: PotentialMatrix, which: str) -> Tuple[bool, Optional[Tuple[int, ...]]]:
    """Look for a cycle ``i0 -> i1 -> ... -> i0`` along edges attaining an extreme.

    Returns ``(found, witness)``; the witness is a shortest such cycle written
    with its first vertex repeated at the end, ties broken by smallest start.

    >>> from measpec.model import potential_from_matrix
    >>> extremal_cycle(potential_from_matrix([[0, 0], [0, 1]]), "min")
    (True, (0, 0))
    """
    if which not in ("min", "max"):
        raise ValueError(f"which must be 'min' or 'max', got {which!r}")
    target = model.alpha_min if which == "min" else model.alpha_max
    adj = np.abs(model.phi - target) <= model.extreme_tolerance()
    best: Optional[Tuple[int, ...]] = None
    for start in range(model.m):
        # BFS for the shortest walk returning to start
        parent = {start: None}
        queue = deque([start])
        found = None
        while queue and found is None:
            u = queue.popleft()
            for v in np.flatnonzero(adj[u]):
                v = int(v)
                if v == start:
                    found = u
                    break
                if v not in parent:
                    parent[v] = u
                    queue.append(v)
        if found is None:
            continue
        path = [start]
        node = found
        while node != start:
            path.append(node)
            node = parent[node]
        cycle = (start,) + tuple(reversed(path[1:])) + (start,)
        if best is None or len(cycle) < len(best):
            best = cycle
    return best is not None, best


def endpoint_slopes(model: PotentialMatrix) -> EndpointSlopes:
    """``P'(-inf)`` and ``P'(+inf)`` from the min/max-plus fixed points."""
    _require_nonconstant(model)
    tau_plus = tropical_fixed_point(model.phi, "max")
    tau_minus = tropical_fixed_point(model.phi, "min")
    attains_min, wmin = extremal_cycle(model, "min")
    attains_max, wmax = extremal_cycle(model, "max")
    return EndpointSlopes(
        slope_minus=float(tau_minus.min()),
        slope_plus=float(tau_plus.max()),
        tau_minus=tau_minus,
        tau_plus=tau_plus,
        attains_min=attains_min,
        attains_max=attains_max,
        witness_min=wmin,
        witness_max=wmax,
    )
