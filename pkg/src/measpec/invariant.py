"""Invariant spectrum for product potentials ``phi[i, j] = f1[i] f2[j]``.

The largest dimension of an ergodic measure giving full mass to the level
set ``alpha`` is the largest normalised entropy of a probability vector
``p`` on the alphabet with ``(p . f1) * (p . f2) = alpha``. For fixed
moments ``beta1 = p . f1``, ``beta2 = p . f2`` the maximiser is the Gibbs
vector ``p ∝ exp(lam1 f1 + lam2 f2)``; an outer search runs over ``beta1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .errors import InfeasibleMomentsError, SolverFailure, UnsupportedModelError
from .model import PotentialMatrix

__all__ = [
    "MaxEntResult",
    "InvariantSpectrumPoint",
    "max_entropy_dual",
    "invariant_spectrum",
    "entropy",
]

MOMENT_TOL = 1e-12
OUTER_GRID = 256
_RANK_TOL = 1e-10
_FACE_WEIGHT = 1e-9
_STALL_TOL = 1e-9


def entropy(p: np.ndarray) -> float:
    """Shannon entropy in nats, with ``0 log 0 = 0``."""
    q = p[p > 0]
    return float(-(q * np.log(q)).sum()) + 0.0  # + 0.0 turns -0.0 into 0.0


@dataclass(frozen=True)
class MaxEntResult:
    weights: np.ndarray
    lambdas: Tuple[float, float]
    entropy: float


@dataclass(frozen=True)
class InvariantSpectrumPoint:
    """``value`` is ``None`` when no probability vector reaches ``alpha``."""

    alpha: float
    value: Optional[float] = None
    beta1: Optional[float] = None
    beta2: Optional[float] = None
    weights: Optional[np.ndarray] = None


def _reduce_constraints(rows: np.ndarray, targets: np.ndarray, labels: List[int]):
    """Drop affinely dependent constraints after checking they are consistent.

    ``rows[0]`` must be the all-ones row. Returns the kept rows (without the
    ones row), their targets, and their labels.
    """
    kept = [0]
    for k in range(1, rows.shape[0]):
        trial = rows[kept + [k]]
        if np.linalg.matrix_rank(trial, tol=_RANK_TOL * max(1.0, np.abs(trial).max())) > len(kept):
            kept.append(k)
            continue
        coef, *_ = np.linalg.lstsq(rows[kept].T, rows[k], rcond=None)
        implied = float(coef @ targets[kept])
        scale = max(1.0, abs(targets[k]), float(np.abs(coef).sum()))
        if abs(implied - targets[k]) > 1e-10 * scale:
            raise InfeasibleMomentsError(
                f"moment {targets[k]!r} conflicts with the value {implied!r} forced by the other constraints"
            )
    kept = kept[1:]
    return rows[kept], targets[kept], [labels[k] for k in kept]


def _support(features: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Indices that can carry positive mass under the moment constraints."""
    m = features.shape[1]
    a_eq = np.vstack([np.ones(m), features])
    b_eq = np.concatenate([[1.0], targets])
    out = np.zeros(m, dtype=bool)
    for i in range(m):
        c = np.zeros(m)
        c[i] = -1.0
        res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
        if res.status == 2:
            raise InfeasibleMomentsError(f"moments {targets.tolist()} are outside the reachable range")
        if res.status != 0:
            raise SolverFailure(f"support LP failed: {res.message}")
        out[i] = -res.fun > 1e-11
    return out


def _newton_dual(features: np.ndarray, targets: np.ndarray, tol: float, max_iter: int = 100):
    """Minimise ``log sum_i exp(lam . (a_i - b))`` by damped Newton steps.

    Returns ``(p, lam)`` or ``None`` if the moments were not matched, which
    happens when the target sits on the boundary of the moment polytope.
    """
    k, m = features.shape
    lam = np.zeros(k)
    if k == 0:
        return np.full(m, 1.0 / m), lam
    centred = features - targets[:, None]
    scale = max(1.0, float(np.abs(centred).max()))

    def evaluate(lam):
        z = lam @ centred
        top = z.max()
        w = np.exp(z - top)
        total = w.sum()
        return top + math.log(total), w / total

    val, p = evaluate(lam)
    for _ in range(max_iter):
        grad = centred @ p
        gnorm = float(np.max(np.abs(grad)))
        if gnorm <= tol * scale:
            return p, lam
        hess = (centred * p) @ centred.T - np.outer(grad, grad)
        try:
            direction = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(direction)):
            return None
        slope = float(grad @ direction)
        step = 1.0
        accepted = False
        while step >= 2.0**-30:
            trial = lam + step * direction
            tval, tp = evaluate(trial)
            # the gradient test keeps progress going once the objective is flat to rounding
            if tval <= val + 1e-4 * step * slope or np.max(np.abs(centred @ tp)) < (1 - 1e-4 * step) * gnorm:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return (p, lam) if gnorm <= _STALL_TOL * scale else None
        lam, val, p = trial, tval, tp
        if np.max(np.abs(lam)) > 1e8 / scale:
            return None
    return None


def max_entropy_dual(f1, f2, beta1: Optional[float], beta2: Optional[float], tol: float = MOMENT_TOL) -> MaxEntResult:
    """Maximum-entropy probability vector with prescribed means of ``f1`` and ``f2``.

    Either target may be ``None`` to drop that constraint. Constraints that
    are affine functions of the others (e.g. ``f1 == f2``) are dropped after a
    consistency check. Targets on the boundary of the reachable set are handled
    by restricting to the face that contains them, where the Gibbs form holds
    with some weights equal to zero.

    Raises
    ------
    InfeasibleMomentsError
        If no probability vector has the requested means.
    SolverFailure
        If Newton iteration fails on the relative interior of the feasible face.
    """
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    m = f1.size
    rows = [np.ones(m)]
    targets = [1.0]
    labels = [-1]
    for label, (f, b) in enumerate(((f1, beta1), (f2, beta2))):
        if b is not None:
            rows.append(f)
            targets.append(float(b))
            labels.append(label)
    feats, tgts, labs = _reduce_constraints(np.array(rows), np.array(targets), labels)

    solved = _newton_dual(feats, tgts, tol)
    weights = np.zeros(m)
    # tiny weights mean the target sits on a face; resolve there instead
    if solved is not None and solved[0].min() > _FACE_WEIGHT:
        weights, lam = solved
    else:
        supp = _support(feats, tgts)
        sub_rows = np.vstack([np.ones(int(supp.sum())), feats[:, supp]])
        sub_feats, sub_tgts, sub_labs = _reduce_constraints(
            sub_rows, np.concatenate([[1.0], tgts]), [-1] + labs
        )
        solved = _newton_dual(sub_feats, sub_tgts, tol)
        if solved is None:
            raise SolverFailure(f"max-entropy Newton diverged at (beta1, beta2) = ({beta1!r}, {beta2!r})")
        weights[supp], lam = solved
        labs = sub_labs
    lambdas = [0.0, 0.0]
    for label, value in zip(labs, lam):
        lambdas[label] = float(value)
    return MaxEntResult(weights=weights, lambdas=(lambdas[0], lambdas[1]), entropy=entropy(weights))


def _try_entropy(f1, f2, b1, b2, tol) -> Optional[MaxEntResult]:
    try:
        return max_entropy_dual(f1, f2, b1, b2, tol)
    except InfeasibleMomentsError:
        return None


def _beta1_intervals(alpha: float, r1: Tuple[float, float], r2: Tuple[float, float]) -> List[Tuple[float, float]]:
    """Values ``b1`` in ``r1`` with ``alpha / b1`` in ``r2`` (``alpha != 0``)."""
    out = []
    for sign in (-1.0, 1.0):
        # on this half-line b2 = alpha / b1 has the sign of alpha * sign
        b2_sign = math.copysign(1.0, alpha) * sign
        if b2_sign > 0:
            j_lo, j_hi = max(r2[0], 0.0), r2[1]
        else:
            j_lo, j_hi = r2[0], min(r2[1], 0.0)
        if j_hi < j_lo or (j_lo == 0.0 and j_hi == 0.0):
            continue
        ends = [alpha / b if b != 0.0 else sign * math.inf for b in (j_lo, j_hi)]
        lo, hi = min(ends), max(ends)
        h_lo, h_hi = (r1[0], min(r1[1], 0.0)) if sign < 0 else (max(r1[0], 0.0), r1[1])
        lo, hi = max(lo, h_lo), min(hi, h_hi)
        if lo <= hi and not (lo == 0.0 and hi == 0.0):
            out.append((lo, hi))
    return out


def _best_of(candidates: Sequence[Tuple[float, float, Optional[MaxEntResult]]]):
    """Highest entropy; near-ties go to the larger ``beta1``."""
    best = None
    for b1, b2, res in sorted(candidates, key=lambda c: -c[0]):
        if res is not None and (best is None or res.entropy > best[2].entropy + 1e-12):
            best = (b1, b2, res)
    return best


def _dependent_case(alpha, f1, f2, tol):
    """Outer problem when ``1, f1, f2`` are affinely dependent: finitely many ``beta1``."""
    ones = np.ones_like(f1)
    c1 = np.ptp(f1) == 0.0
    c2 = np.ptp(f2) == 0.0
    if c1 and c2:
        if abs(f1[0] * f2[0] - alpha) <= 1e-12 * max(1.0, abs(alpha)):
            res = max_entropy_dual(f1, f2, None, None, tol)
            return [(float(f1[0]), float(f2[0]), res)]
        return []
    if c1 or c2:
        const, other, const_first = (f1, f2, True) if c1 else (f2, f1, False)
        c = float(const[0])
        if c == 0.0:
            if alpha != 0.0:
                return []
            res = max_entropy_dual(f1, f2, None, None, tol)
            b_other = float(res.weights @ other)
            return [(c, b_other, res) if const_first else (b_other, c, res)]
        b_other = alpha / c
        b1, b2 = (c, b_other) if const_first else (b_other, c)
        res = _try_entropy(f1, f2, b1 if not const_first else None, b2 if const_first else None, tol)
        return [(b1, b2, res)]
    # f2 = a f1 + b
    coef, *_ = np.linalg.lstsq(np.column_stack([f1, ones]), f2, rcond=None)
    a, b = float(coef[0]), float(coef[1])
    roots = np.roots([a, b, -alpha])
    out = []
    for r in roots:
        if abs(r.imag) > 1e-12 * max(1.0, abs(r.real)):
            continue
        b1 = float(r.real)
        res = _try_entropy(f1, f2, b1, None, tol)
        out.append((b1, a * b1 + b, res))
    return out


def _generic_case(alpha, f1, f2, tol):
    r1 = (float(f1.min()), float(f1.max()))
    r2 = (float(f2.min()), float(f2.max()))
    if alpha == 0.0:
        cands = []
        if r1[0] <= 0.0 <= r1[1]:
            res = _try_entropy(f1, f2, 0.0, None, tol)
            if res is not None:
                cands.append((0.0, float(res.weights @ f2), res))
        if r2[0] <= 0.0 <= r2[1]:
            res = _try_entropy(f1, f2, None, 0.0, tol)
            if res is not None:
                cands.append((float(res.weights @ f1), 0.0, res))
        return cands

    def objective(b1):
        res = _try_entropy(f1, f2, b1, alpha / b1, tol)
        return res

    cands = []
    for lo, hi in _beta1_intervals(alpha, r1, r2):
        if lo == hi:
            cands.append((lo, alpha / lo, objective(lo)))
            continue
        grid = np.linspace(lo, hi, OUTER_GRID)
        results = [objective(float(b)) for b in grid]
        values = np.array([-math.inf if r is None else r.entropy for r in results])
        if not np.isfinite(values).any():
            continue
        k = int(np.argmax(values))
        cands.append((float(grid[k]), alpha / float(grid[k]), results[k]))
        a, c = grid[max(k - 1, 0)], grid[min(k + 1, OUTER_GRID - 1)]
        # infeasible points get a large penalty so the bounded search stays inside
        penalty = 10.0 * math.log(f1.size) + 1.0

        def neg(b1):
            r = objective(b1)
            return penalty if r is None else -r.entropy

        opt = minimize_scalar(neg, bounds=(float(a), float(c)), method="bounded",
                              options={"xatol": 1e-13})
        b1 = float(opt.x)
        cands.append((b1, alpha / b1, objective(b1)))
    return cands


def invariant_spectrum(model: PotentialMatrix, alpha: float, tol: float = MOMENT_TOL) -> InvariantSpectrumPoint:
    """Largest dimension of a Bernoulli measure whose factor means multiply to ``alpha``.

    Raises
    ------
    UnsupportedModelError
        If the model was not built from factor functions.
    """
    if model.factors is None:
        raise UnsupportedModelError("invariant spectrum needs a model given by factors f1, f2")
    if not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha}")
    f1, f2 = (np.asarray(f) for f in model.factors)
    rows = np.vstack([np.ones(model.m), f1, f2])
    rank = np.linalg.matrix_rank(rows, tol=_RANK_TOL * max(1.0, np.abs(rows).max()))
    if rank < 3:
        cands = _dependent_case(alpha, f1, f2, tol)
    else:
        cands = _generic_case(alpha, f1, f2, tol)
    best = _best_of(cands)
    if best is None:
        return InvariantSpectrumPoint(alpha=alpha)
    b1, b2, res = best
    return InvariantSpectrumPoint(
        alpha=alpha,
        value=res.entropy / math.log(model.m),
        beta1=float(res.weights @ f1),
        beta2=float(res.weights @ f2),
        weights=res.weights,
    )
