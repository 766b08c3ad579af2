"""Command-line interface.

::

    measpec solve     --model M --s X
    measpec pressure  --model M --s-min A --s-max B --steps K [--out F]
    measpec spectrum  --model M [--alpha X | --alpha-steps K] [--out F]
    measpec finv      --model M [--alpha X | --alpha-steps K] [--out F]
    measpec endpoints --model M
    measpec sample    --model M --s X [--n N --seeds K --seed Z] [--out F]
    measpec verify    [--model M] [--csv F]

Exit status: 0 on success, 1 on bad input, 2 on numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import SolverFailure, SpectrumError
from .invariant import invariant_spectrum
from .model import PotentialMatrix, load_model
from .pressure import endpoint_slopes, pressure_derivative
from .sampler import lln_experiment
from .spectrum import spectrum_curve, legendre_point
from .transfer import DEFAULT_TOL, solve_transfer

SPECTRUM_COLUMNS = ("alpha", "s_alpha", "P", "Pprime", "dim", "finv", "class")
PRESSURE_COLUMNS = ("s", "P", "Pprime")
FINV_COLUMNS = ("alpha", "finv", "present", "beta1", "beta2")


def fmt(x) -> str:
    """12 significant digits, '.' decimal separator."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return f"{float(x):.12g}"


def render_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_output(text: str, out: Optional[str]) -> None:
    """Write to ``out`` atomically (temp file + rename), or to stdout."""
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _finv_value(model: PotentialMatrix, alpha: float) -> float:
    # absent is rendered as 0 to match the plotted invariant spectrum
    if model.factors is None:
        return math.nan
    pt = invariant_spectrum(model, alpha)
    return 0.0 if pt.value is None else pt.value


def spectrum_rows(model: PotentialMatrix, alpha: Optional[float], steps: int, tol: float) -> List[list]:
    if alpha is not None:
        points = [legendre_point(model, alpha, tol)]
    else:
        points = spectrum_curve(model, steps, tol)
    return [
        [p.alpha, p.s_alpha, p.P_at_s, p.Pprime_at_s, p.dim, _finv_value(model, p.alpha), p.kind.value]
        for p in points
    ]


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise SpectrumError(f"{args.command} needs {flags}")


def cmd_solve(args, model) -> str:
    _require(args, "s")
    sol = solve_transfer(model, args.s, args.tol)
    pt = pressure_derivative(model, args.s, args.tol, allow_constant=True)
    return json.dumps(
        {
            "s": args.s,
            "t": sol.t.tolist(),
            "log_t": sol.log_t.tolist(),
            "P": pt.P,
            "Pprime": pt.Pprime,
            "iterations": sol.iterations,
            "sup_residual": sol.sup_residual,
        },
        indent=2,
    ) + "\n"


def cmd_pressure(args, model) -> str:
    _require(args, "s_min", "s_max")
    grid = np.linspace(args.s_min, args.s_max, args.steps)
    rows = []
    for s in grid:
        pt = pressure_derivative(model, float(s), args.tol, allow_constant=True)
        rows.append([pt.s, pt.P, pt.Pprime])
    return render_csv(PRESSURE_COLUMNS, rows)


def cmd_spectrum(args, model) -> str:
    steps = 201 if args.alpha_steps is None else args.alpha_steps
    return render_csv(SPECTRUM_COLUMNS, spectrum_rows(model, args.alpha, steps, args.tol))


def cmd_finv(args, model) -> str:
    if args.alpha is not None:
        grid = [args.alpha]
    else:
        steps = 201 if args.alpha_steps is None else args.alpha_steps
        grid = np.linspace(model.alpha_min, model.alpha_max, steps)
    rows = []
    for a in grid:
        pt = invariant_spectrum(model, float(a))
        present = pt.value is not None
        rows.append([
            float(a),
            pt.value if present else 0.0,
            present,
            pt.beta1 if present else math.nan,
            pt.beta2 if present else math.nan,
        ])
    return render_csv(FINV_COLUMNS, rows)


def cmd_endpoints(args, model) -> str:
    sl = endpoint_slopes(model)
    return json.dumps(
        {
            "slope_minus": sl.slope_minus,
            "slope_plus": sl.slope_plus,
            "alpha_min": model.alpha_min,
            "alpha_max": model.alpha_max,
            "tau_minus": sl.tau_minus.tolist(),
            "tau_plus": sl.tau_plus.tolist(),
            "attains_min": sl.attains_min,
            "attains_max": sl.attains_max,
            "witness_min": None if sl.witness_min is None else list(sl.witness_min),
            "witness_max": None if sl.witness_max is None else list(sl.witness_max),
        },
        indent=2,
    ) + "\n"


def cmd_sample(args, model) -> str:
    _require(args, "s")
    n = 2**15 if args.n is None else args.n
    seeds = [args.seed + k for k in range(args.seeds)]
    stats = lln_experiment(model, args.s, n, seeds, args.tol)
    return stats.to_json() + "\n"


def cmd_verify(args, model) -> str:
    from .verify import run_checks

    results = run_checks(model, csv_path=args.csv)
    lines = [f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail}" for r in results]
    failed = sum(not r.ok for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    args._verify_failed = failed > 0
    return "\n".join(lines) + "\n"


COMMANDS = {
    "solve": cmd_solve,
    "pressure": cmd_pressure,
    "spectrum": cmd_spectrum,
    "finv": cmd_finv,
    "endpoints": cmd_endpoints,
    "sample": cmd_sample,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="measpec",
        description="Multifractal spectrum of multiple ergodic averages on the full shift.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--model", help="JSON model file")
    parser.add_argument("--s", type=float)
    parser.add_argument("--s-min", type=float)
    parser.add_argument("--s-max", type=float)
    parser.add_argument("--steps", type=int, default=101)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--alpha-steps", type=int)
    parser.add_argument("--n", type=int, help="number of pairs (k, 2k); power of two >= 1024")
    parser.add_argument("--seeds", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL)
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--csv", help="verify: CSV file produced by 'spectrum' or 'pressure'")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if not args.tol > 0:
            raise SpectrumError(f"--tol must be positive, got {args.tol}")
        if args.command != "verify" and args.model is None:
            raise SpectrumError(f"{args.command} needs --model")
        model = None if args.model is None else load_model(args.model)
        text = COMMANDS[args.command](args, model)
        write_output(text, args.out)
    except SolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SpectrumError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if getattr(args, "_verify_failed", False):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
