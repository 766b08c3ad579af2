"""Dimension spectrum of the level sets of the multiple ergodic average.

For ``alpha`` strictly between the asymptotic slopes of the pressure,

    dim L(alpha) = (P(s) - s P'(s)) / (2 log m),   with P'(s) = alpha.

At the two slopes the same quantity is taken as a limit ``s -> -inf`` or
``s -> +inf``; outside them the level set is empty.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import LimitNonconvergence, SolverFailure
from .model import PotentialMatrix
from .pressure import EndpointSlopes, _require_nonconstant, endpoint_slopes, pressure_derivative
from .transfer import DEFAULT_TOL

__all__ = [
    "PointClass",
    "SpectrumPoint",
    "legendre_point",
    "spectrum_curve",
    "ROOT_TOL",
    "ENDPOINT_TOL",
]

ROOT_TOL = 1e-10
ENDPOINT_TOL = 1e-9
LIMIT_STABILITY = 1e-6
LIMIT_MAX_S = 2.0**20
_MAX_BRACKET_S = 2.0**40


class PointClass(str, enum.Enum):
    INTERIOR = "interior"
    ENDPOINT_LEFT = "endpoint_left"
    ENDPOINT_RIGHT = "endpoint_right"
    EMPTY = "empty"


@dataclass(frozen=True)
class SpectrumPoint:
    """One point of the spectrum.

    For endpoints ``s_alpha`` is ``-inf``/``+inf`` and ``P_at_s``,
    ``Pprime_at_s`` are the values at the last ``s`` of the limit sequence.
    For empty points every numeric field except ``alpha`` is NaN.
    """

    alpha: float
    s_alpha: float
    P_at_s: float
    Pprime_at_s: float
    dim: float
    kind: PointClass


def _legendre_value(model: PotentialMatrix, s: float, tol: float):
    pt = pressure_derivative(model, s, tol)
    value = (pt.P - s * pt.Pprime) / (2.0 * math.log(model.m))
    # rounding can push the endpoint values a hair outside [0, 1]
    return pt, min(1.0, max(0.0, value))


def _solve_s(model: PotentialMatrix, alpha: float, tol: float) -> float:
    def f(s):
        return pressure_derivative(model, s, tol).Pprime - alpha

    step = 1.0 / model.spread
    lo, hi = -step, step
    flo, fhi = f(lo), f(hi)
    while flo > 0:
        hi, fhi = lo, flo
        lo *= 2.0
        if abs(lo) > _MAX_BRACKET_S:
            raise SolverFailure(f"could not bracket P'(s) = {alpha!r} from below")
        flo = f(lo)
    while fhi < 0:
        lo, flo = hi, fhi
        hi *= 2.0
        if hi > _MAX_BRACKET_S:
            raise SolverFailure(f"could not bracket P'(s) = {alpha!r} from above")
        fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _endpoint_limit(model: PotentialMatrix, alpha: float, sign: float, tol: float) -> SpectrumPoint:
    s = sign / model.spread
    prev = None
    while True:
        pt, value = _legendre_value(model, s, tol)
        if prev is not None and abs(value - prev) < LIMIT_STABILITY:
            kind = PointClass.ENDPOINT_LEFT if sign < 0 else PointClass.ENDPOINT_RIGHT
            return SpectrumPoint(alpha, sign * math.inf, pt.P, pt.Pprime, value, kind)
        prev = value
        s *= 2.0
        if abs(s) > LIMIT_MAX_S:
            raise LimitNonconvergence(
                f"endpoint dimension at alpha={alpha!r} still moving by "
                f"more than {LIMIT_STABILITY:g} at |s|={LIMIT_MAX_S:g}"
            )


def legendre_point(
    model: PotentialMatrix,
    alpha: float,
    tol: float = DEFAULT_TOL,
    slopes: Optional[EndpointSlopes] = None,
) -> SpectrumPoint:
    """Spectrum value at a single ``alpha``, classified as interior, endpoint or empty.

    Raises
    ------
    ConstantPotentialError
        For constant potentials.
    LimitNonconvergence
        If an endpoint limit has not settled by ``|s| = 2**20``.
    """
    _require_nonconstant(model)
    if slopes is None:
        slopes = endpoint_slopes(model)
    lo, hi = slopes.slope_minus, slopes.slope_plus
    nan = math.nan
    if alpha < lo - ENDPOINT_TOL or alpha > hi + ENDPOINT_TOL:
        return SpectrumPoint(alpha, nan, nan, nan, nan, PointClass.EMPTY)
    if abs(alpha - lo) <= ENDPOINT_TOL:
        return _endpoint_limit(model, alpha, -1.0, tol)
    if abs(alpha - hi) <= ENDPOINT_TOL:
        return _endpoint_limit(model, alpha, 1.0, tol)

    s = _solve_s(model, alpha, tol)
    pt, value = _legendre_value(model, s, tol)
    if abs(pt.Pprime - alpha) > ROOT_TOL:
        raise SolverFailure(
            f"root of P'(s) = {alpha!r} only reached residual {abs(pt.Pprime - alpha):.3e}"
        )
    return SpectrumPoint(alpha, s, pt.P, pt.Pprime, value, PointClass.INTERIOR)


def spectrum_curve(model: PotentialMatrix, n_points: int = 201, tol: float = DEFAULT_TOL) -> List[SpectrumPoint]:
    """Evenly spaced spectrum over ``[P'(-inf), P'(+inf)]``, endpoints included."""
    if n_points < 3:
        raise ValueError(f"n_points must be at least 3, got {n_points}")
    _require_nonconstant(model)
    slopes = endpoint_slopes(model)
    grid = np.linspace(slopes.slope_minus, slopes.slope_plus, n_points)
    return [legendre_point(model, float(a), tol, slopes) for a in grid]
