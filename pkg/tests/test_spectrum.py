import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from measpec import spectrum as spectrum_mod
from measpec.errors import ConstantPotentialError, LimitNonconvergence
from measpec.invariant import invariant_spectrum
from measpec.model import potential_from_matrix
from measpec.oracle import example1_dim, example1_finv, x0_dimension
from measpec.pressure import pressure, pressure_derivative
from measpec.spectrum import PointClass, legendre_point, spectrum_curve


def test_example1_points(ex1):
    pt = legendre_point(ex1, 0.0)
    assert pt.kind is PointClass.INTERIOR
    assert pt.s_alpha == pytest.approx(0.0, abs=1e-12)
    assert pt.dim == pytest.approx(1.0, abs=1e-12)
    pt = legendre_point(ex1, math.tanh(1.0))
    assert pt.s_alpha == pytest.approx(1.0, abs=1e-10)
    # 1/2 + H((1 + tanh 1)/2)/2, evaluated from the closed form
    assert pt.dim == pytest.approx(0.7635326705015808, abs=1e-10)
    assert legendre_point(ex1, -0.5).dim == pytest.approx(0.9056390622295665, abs=1e-10)


def test_example2_peak(ex2):
    pt = legendre_point(ex2, 0.25)
    assert pt.s_alpha == pytest.approx(0.0, abs=1e-12)
    assert pt.dim == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("alpha", [2.0, -1.5, 1.0 + 1e-6])
def test_empty(ex1, alpha):
    pt = legendre_point(ex1, alpha)
    assert pt.kind is PointClass.EMPTY
    assert math.isnan(pt.dim)


def test_example2_left_endpoint(ex2):
    pt = legendre_point(ex2, 0.0)
    assert pt.kind is PointClass.ENDPOINT_LEFT
    assert pt.s_alpha == -math.inf
    # t1^3 = t1 + 1, t0 = t1^2 (plastic number), dim = log2 t0
    assert pt.dim == pytest.approx(math.log2(1.324717957244746**2), abs=1e-6)
    assert pt.dim == pytest.approx(x0_dimension(), abs=1e-6)


def test_endpoints_example1(ex1):
    left, right = legendre_point(ex1, -1.0), legendre_point(ex1, 1.0)
    assert left.kind is PointClass.ENDPOINT_LEFT and right.kind is PointClass.ENDPOINT_RIGHT
    assert left.dim == pytest.approx(0.5, abs=1e-6)
    assert right.dim == pytest.approx(0.5, abs=1e-6)


def test_curve_example1_five(ex1):
    curve = spectrum_curve(ex1, 5)
    assert [p.alpha for p in curve] == pytest.approx([-1, -0.5, 0, 0.5, 1], abs=1e-15)
    dims = [p.dim for p in curve]
    assert dims == pytest.approx([0.5, 0.9056390622295665, 1.0, 0.9056390622295665, 0.5], abs=1e-6)
    assert curve[0].kind is PointClass.ENDPOINT_LEFT
    assert curve[-1].kind is PointClass.ENDPOINT_RIGHT


def test_curve_invariants(ex1, ex2, rand_models):
    for mdl in [ex1, ex2] + rand_models[:6]:
        curve = spectrum_curve(mdl, 41)
        assert curve[0].kind is PointClass.ENDPOINT_LEFT
        assert curve[-1].kind is PointClass.ENDPOINT_RIGHT
        s = [p.s_alpha for p in curve]
        assert all(b >= a for a, b in zip(s, s[1:]))
        dims = np.array([p.dim for p in curve])
        assert np.all((0 <= dims) & (dims <= 1))
        assert np.all(np.diff(dims, 2) <= 1e-8)
        for p in curve[1:-1]:
            assert p.kind is PointClass.INTERIOR
            assert abs(pressure_derivative(mdl, p.s_alpha).Pprime - p.alpha) <= 1e-9
            assert p.dim == pytest.approx((p.P_at_s - p.s_alpha * p.Pprime_at_s) / (2 * math.log(mdl.m)), abs=1e-15)


def test_curve_maximum_is_one(ex2, rand_models):
    for mdl in [ex2] + rand_models[:4]:
        a0 = pressure_derivative(mdl, 0.0).Pprime
        assert legendre_point(mdl, a0).dim == pytest.approx(1.0, abs=1e-10)
        assert max(p.dim for p in spectrum_curve(mdl, 21)) <= 1.0


def test_example2_curve_peak(ex2):
    curve = spectrum_curve(ex2, 41)  # grid step 1/40 hits alpha = 1/4
    best = max(curve, key=lambda p: p.dim)
    assert best.alpha == pytest.approx(0.25, abs=1e-12)
    assert best.dim == pytest.approx(1.0, abs=1e-10)


def test_example1_closed_form(ex1):
    for a in np.linspace(-0.9, 0.9, 19):
        assert legendre_point(ex1, a).dim == pytest.approx(example1_dim(a), abs=1e-6)


def test_against_brute_force_legendre(rand_models):
    # independent route: minimise (P(s) - alpha s) directly over s
    for mdl in rand_models[:6]:
        curve = spectrum_curve(mdl, 9)
        for p in curve[1:-1]:
            res = minimize_scalar(lambda s: pressure(mdl, s).P - p.alpha * s,
                                  bounds=(-200 / mdl.spread, 200 / mdl.spread), method="bounded",
                                  options={"xatol": 1e-10})
            assert p.dim == pytest.approx(res.fun / (2 * math.log(mdl.m)), abs=1e-8)


def test_finv_below_dim(ex1, ex2):
    for mdl in (ex1, ex2):
        for p in spectrum_curve(mdl, 21):
            f = invariant_spectrum(mdl, p.alpha).value
            if f is not None:
                assert f <= p.dim + 1e-6


def test_finv_closed_form_example1(ex1):
    for a in np.arange(10) / 10:
        assert invariant_spectrum(ex1, a).value == pytest.approx(example1_finv(a), abs=1e-6)


def test_constant_rejected():
    mdl = potential_from_matrix(np.ones((2, 2)))
    with pytest.raises(ConstantPotentialError):
        legendre_point(mdl, 1.0)
    with pytest.raises(ConstantPotentialError):
        spectrum_curve(mdl, 5)


def test_limit_nonconvergence_reported(ex2, monkeypatch):
    monkeypatch.setattr(spectrum_mod, "LIMIT_MAX_S", 1.5)
    with pytest.raises(LimitNonconvergence):
        legendre_point(ex2, 0.0)


def test_curve_needs_three_points(ex1):
    with pytest.raises(ValueError):
        spectrum_curve(ex1, 2)
