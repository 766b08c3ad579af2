"""Self-check suite behind ``measpec verify``."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from . import oracle
from .model import PotentialMatrix
from .pressure import endpoint_slopes, pressure_derivative
from .sampler import kernel_at
from .spectrum import PointClass, legendre_point
from .transfer import solve_transfer

_CLASSES = {c.value for c in PointClass}


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def read_csv(path) -> Tuple[List[str], List[dict]]:
    """Parse a CSV emitted by the CLI; numeric cells become floats."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = list(reader.fieldnames or [])
        rows = []
        for raw in reader:
            row = {}
            for key, val in raw.items():
                row[key] = val if key == "class" else float(val)
            rows.append(row)
    return header, rows


def check_csv(path) -> CheckResult:
    from .cli import PRESSURE_COLUMNS, SPECTRUM_COLUMNS, FINV_COLUMNS

    try:
        header, rows = read_csv(path)
    except (OSError, ValueError) as exc:
        return CheckResult("csv round-trip", False, f"cannot parse {path}: {exc}")
    if tuple(header) == SPECTRUM_COLUMNS:
        bad = [r for r in rows if r["class"] not in _CLASSES]
        if bad:
            return CheckResult("csv round-trip", False, f"unknown class {bad[0]['class']!r}")
        dims = [r["dim"] for r in rows if r["class"] != "empty"]
        if any(not (0.0 <= d <= 1.0) for d in dims):
            return CheckResult("csv round-trip", False, "dim outside [0, 1]")
    elif tuple(header) not in (PRESSURE_COLUMNS, FINV_COLUMNS):
        return CheckResult("csv round-trip", False, f"unrecognised header {header}")
    return CheckResult("csv round-trip", True, f"{len(rows)} rows, columns {','.join(header)}")


def _check(name: str, fn: Callable[[], Tuple[float, float]]) -> CheckResult:
    """``fn`` returns ``(error, tolerance)``."""
    try:
        err, tol = fn()
    except Exception as exc:  # reported, not raised: verify must list every item
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, bool(err <= tol), f"error {err:.3e} (tolerance {tol:g})")


def example_checks() -> List[CheckResult]:
    e1, e2 = oracle.example1_model(), oracle.example2_model()
    out = []

    def ex1_t():
        errs = [np.max(np.abs(solve_transfer(e1, s).t - oracle.example1_t(s))) / oracle.example1_t(s)
                for s in np.linspace(-10, 10, 41)]
        return max(errs), 1e-12

    def ex2_cubic():
        errs = [abs(pressure_derivative(e2, s).P - 2 * math.log(oracle.example2_t0(s)))
                for s in (-5, -2, 0, 1, math.log(2), 3)]
        return max(errs), 1e-8

    def ex1_dim():
        errs = [abs(legendre_point(e1, a).dim - oracle.example1_dim(a)) for a in np.linspace(-0.9, 0.9, 19)]
        return max(errs), 1e-6

    def ex1_finv():
        from .invariant import invariant_spectrum

        errs = [abs(invariant_spectrum(e1, a).value - oracle.example1_finv(a)) for a in np.arange(10) / 10]
        return max(errs), 1e-6

    def x0():
        return abs(legendre_point(e2, 0.0).dim - oracle.x0_dimension()), 1e-3

    def slopes():
        a = endpoint_slopes(e1)
        b = endpoint_slopes(e2)
        return max(abs(a.slope_minus + 1), abs(a.slope_plus - 1), abs(b.slope_minus), abs(b.slope_plus - 1)), 1e-9

    out.append(_check("example 1: t = 2 cosh s (relative)", ex1_t))
    out.append(_check("example 2: P = 2 log t0 from the cubic", ex2_cubic))
    out.append(_check("example 1: dim closed form", ex1_dim))
    out.append(_check("example 1: invariant spectrum closed form", ex1_finv))
    out.append(_check("example 2: left endpoint equals dim X0", x0))
    out.append(_check("examples: endpoint slopes", slopes))
    return out


def model_checks(model: PotentialMatrix) -> List[CheckResult]:
    grid = np.linspace(-20, 20, 41)
    out = []

    def residual():
        return max(solve_transfer(model, s).sup_residual for s in grid), 1e-12

    def contraction():
        return max(solve_transfer(model, s).contraction for s in grid), 0.5 + 1e-9

    def stochastic():
        return max(np.max(np.abs(kernel_at(model, s).p.sum(axis=1) - 1)) for s in grid), 1e-12

    out.append(_check("transfer residual on s in [-20, 20]", residual))
    out.append(_check("transfer contraction factor", contraction))
    out.append(_check("transition matrix row sums", stochastic))
    if model.is_constant:
        return out

    def derivative():
        h = 1e-5
        errs = []
        for s in np.linspace(-5, 5, 11):
            pt = pressure_derivative(model, s)
            fd = oracle.finite_difference(lambda x: pressure_derivative(model, x).P, s, h)
            errs.append(abs(pt.Pprime - fd))
        return max(errs), 1e-6

    def convexity():
        # h**2 * P'' drops below rounding at |s| ~ 10 when h is much smaller
        h = 0.1
        worst = math.inf
        for s in np.linspace(-10, 10, 41):
            d2 = sum(c * pressure_derivative(model, s + k * h).P for c, k in ((1, -1), (-2, 0), (1, 1)))
            worst = min(worst, d2)
        # report the shortfall below the required positive margin
        return max(0.0, 1e-12 - worst), 0.0

    def endpoint_consistency():
        # start at |s| = 40/spread; slowly mixing models need larger |s|
        sl = endpoint_slopes(model)
        for scale in (40.0, 400.0, 4e3, 4e4):
            big = scale / model.spread
            err = max(abs(pressure_derivative(model, big).Pprime - sl.slope_plus),
                      abs(pressure_derivative(model, -big).Pprime - sl.slope_minus))
            if err <= 1e-3:
                break
        return err, 1e-3

    def normalisation():
        n = max(1, min(8, int(math.log(2**16) / math.log(model.m))))
        rep = oracle.exhaustive_cylinder_check(model, 1.0, n, n_samples=1000)
        return rep.mass_error, 1e-10

    out.append(_check("P' against central differences", derivative))
    out.append(_check("strict convexity of P on |s| <= 10", convexity))
    out.append(_check("endpoint slopes against P'(s) at large |s|", endpoint_consistency))
    out.append(_check("cylinder masses sum to one", normalisation))
    return out


def run_checks(model: Optional[PotentialMatrix] = None, csv_path=None) -> List[CheckResult]:
    results = example_checks()
    if model is not None:
        results += model_checks(model)
    if csv_path is not None:
        results.append(check_csv(csv_path))
    return results
