"""Command-line front end.

Exit codes: 0 success, 1 verification mismatch, 2 invalid input, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import export
from .errors import NumericalError, ValidationError
from .free_energy import (
    MOBIUS_PROFILE,
    BoundaryFreeEnergy,
    GeneralFreeEnergy,
    MobiusFreeEnergy,
    SeriesControl,
    WeightedFreeEnergy,
    WeightProfile,
    finite_volume_free_energy,
)
from .lattice import as_box, chain_census, validate_multipliers
from .oracle import brute_force_mgf_log, mc_free_energy, sample_sums
from .rate import SolverControl, fan_dimension_E, legendre_rate, mobius_dimension_F

FIGURE_SETTINGS = {1: (2, 1), 2: (2, 3, 5, 7, 11)}
FIGURE_BIASES = tuple(round(0.1 * k, 1) for k in range(1, 10))
VERIFY_TOL = 1e-10
# flags whose values may legitimately start with "-"
_VALUE_FLAGS = ("--beta", "--beta-range", "--x", "--x-range", "--alpha-range", "--values")


def int_list(text: str) -> tuple[int, ...]:
    try:
        out = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers like 2,3 (got {text!r})") from None
    return out


def float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers like 1,-1,0 (got {text!r})") from None


def grid(text: str) -> np.ndarray:
    """Inclusive start:stop:step range."""
    try:
        start, stop, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step like -3:3:0.5 (got {text!r})") from None
    if not step > 0 or stop < start:
        raise argparse.ArgumentTypeError(f"range {text!r} must have step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def _betas(args) -> np.ndarray:
    if args.beta_range is not None:
        return args.beta_range
    if args.beta is not None:
        return np.array([args.beta])
    raise ValidationError("one of --beta or --beta-range is required")


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise ValidationError(f"{args.command} requires {', '.join(missing)}")


def _profile(args) -> WeightProfile:
    if args.mobius:
        return MOBIUS_PROFILE
    _require(args, "values", "freqs")
    return WeightProfile(args.values, args.freqs)


def _curve(evaluator, betas) -> list[dict]:
    rows = []
    for b in betas:
        b = float(b)
        rows.append(
            {
                "beta": b,
                "value": evaluator.value(b),
                "derivative": evaluator.derivative(b),
                "tail_bound": evaluator.tail_bound(b),
            }
        )
    return rows


def _emit(args, rows, columns):
    text = export.to_json(rows, columns) if args.format == "json" else export.to_csv(rows, columns)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_counts(args):
    _require(args, "N", "p")
    census = chain_census(as_box(args.N), validate_multipliers(args.p))
    _emit(args, census.rows(), export.CENSUS_COLUMNS)


def cmd_free_energy(args):
    ctrl = SeriesControl(args.terms)
    if args.figure is not None:
        p = FIGURE_SETTINGS[args.figure]
        betas = args.beta_range if args.beta_range is not None else grid("-3:3:0.05")
        rows = []
        for r in FIGURE_BIASES:
            for row in _curve(GeneralFreeEnergy(r, p, ctrl), betas):
                rows.append({"r": r, **row})
        _emit(args, rows, ("r",) + export.CURVE_COLUMNS)
        return
    _require(args, "r", "p")
    _emit(args, _curve(GeneralFreeEnergy(args.r, validate_multipliers(args.p), ctrl), _betas(args)), export.CURVE_COLUMNS)


def cmd_rate(args):
    if args.x_range is not None:
        xs = args.x_range
    elif args.x is not None:
        xs = [args.x]
    else:
        raise ValidationError("rate requires --x or --x-range")
    if args.values is not None or args.mobius:
        evaluator = WeightedFreeEnergy(_profile(args))
    else:
        _require(args, "r", "p")
        evaluator = GeneralFreeEnergy(args.r, validate_multipliers(args.p), SeriesControl(args.terms))
    ctrl = SolverControl(bracket_limit=args.bracket_limit)
    rows = [legendre_rate(evaluator, float(x), ctrl).record() for x in xs]
    _emit(args, rows, export.RATE_COLUMNS)


def cmd_weighted(args):
    _emit(args, _curve(WeightedFreeEnergy(_profile(args)), _betas(args)), export.CURVE_COLUMNS)


def cmd_mobius(args):
    _emit(args, _curve(MobiusFreeEnergy(), _betas(args)), export.CURVE_COLUMNS)


def cmd_boundary(args):
    _require(args, "p")
    evaluator = BoundaryFreeEnergy(args.kind, validate_multipliers(args.p), SeriesControl(args.terms))
    _emit(args, _curve(evaluator, _betas(args)), export.CURVE_COLUMNS)


def cmd_spectrum_dim(args):
    _require(args, "alpha_range")
    rows = []
    for a in args.alpha_range:
        a = float(a)
        dim = mobius_dimension_F(a) if args.mobius else fan_dimension_E(_profile(args), a)
        rows.append({"alpha": a, "dimension": dim})
    _emit(args, rows, ("alpha", "dimension"))


def cmd_verify(args):
    _require(args, "N", "p", "r")
    N, p = as_box(args.N), validate_multipliers(args.p)
    ok = True
    for b in _betas(args):
        b = float(b)
        oracle = brute_force_mgf_log(N, p, args.r, b)
        formula = N.volume * finite_volume_free_energy(N, p, args.r, b)
        diff = abs(oracle - formula)
        agree = diff <= VERIFY_TOL * max(1.0, abs(oracle))
        ok &= agree
        print(
            f"beta={export.format_value(b)} oracle={export.format_value(oracle)} "
            f"formula={export.format_value(formula)} abs_diff={diff:.3e} {'PASS' if agree else 'FAIL'}"
        )
    return 0 if ok else 1


def cmd_mc(args):
    _require(args, "N", "p", "r")
    N, p = as_box(args.N), validate_multipliers(args.p)
    if args.dump_samples:
        S = sample_sums(N, p, args.r, args.samples, args.seed)
        rows = [{"sample_index": k, "S": int(s)} for k, s in enumerate(S)]
        Path(args.dump_samples).write_text(export.to_csv(rows, export.SAMPLE_COLUMNS))
    b = float(_betas(args)[0])
    est = mc_free_energy(N, p, args.r, b, args.samples, args.seed, args.estimator)
    rec = est.record()
    _emit(args, [rec], list(rec))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int_list, help="multipliers, e.g. 2,3")
    common.add_argument("--N", type=int_list, help="box sides, e.g. 12,12")
    common.add_argument("--r", type=float, help="Bernoulli bias P(spin = +1)")
    common.add_argument("--beta", type=float)
    common.add_argument("--beta-range", type=grid, help="start:stop:step, inclusive")
    common.add_argument("--terms", type=int, default=100, help="series truncation")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=10_000)
    common.add_argument("--output", "-o")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    weights = argparse.ArgumentParser(add_help=False)
    weights.add_argument("--values", type=float_list, help="weight values v_k")
    weights.add_argument("--freqs", type=float_list, help="frequencies P_k")
    weights.add_argument("--mobius", action="store_true", help="use the Mobius weight profile")

    parser = argparse.ArgumentParser(prog="multildp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("counts", parents=[common], help="chain census of a box").set_defaults(func=cmd_counts)

    fe = sub.add_parser("free-energy", parents=[common], help="general free-energy curve")
    fe.add_argument("--figure", type=int, choices=sorted(FIGURE_SETTINGS))
    fe.set_defaults(func=cmd_free_energy)

    rate = sub.add_parser("rate", parents=[common, weights], help="Legendre rate curve")
    rate.add_argument("--x", type=float)
    rate.add_argument("--x-range", type=grid)
    rate.add_argument("--bracket-limit", type=float, default=50.0)
    rate.set_defaults(func=cmd_rate)

    sub.add_parser("weighted", parents=[common, weights], help="weighted free energy (r = 1/2)").set_defaults(
        func=cmd_weighted
    )
    sub.add_parser("mobius", parents=[common], help="Mobius-weighted free energy").set_defaults(func=cmd_mobius)

    bd = sub.add_parser("boundary", parents=[common], help="energies under boundary conditions (d = 2)")
    bd.add_argument("--kind", choices=("free", "bc1", "bc2", "bcp"), required=True)
    bd.set_defaults(func=cmd_boundary)

    sd = sub.add_parser("spectrum-dim", parents=[common, weights], help="dimension spectra")
    sd.add_argument("--alpha-range", type=grid)
    sd.set_defaults(func=cmd_spectrum_dim)

    sub.add_parser("verify", parents=[common], help="brute force vs chain formula").set_defaults(func=cmd_verify)

    mc = sub.add_parser("mc", parents=[common], help="Monte Carlo free-energy estimate")
    mc.add_argument("--estimator", choices=("chain", "global"), default="chain")
    mc.add_argument("--dump-samples", help="write sample_index,S CSV here")
    mc.set_defaults(func=cmd_mc)
    return parser


def _join_negative_values(argv: list[str]) -> list[str]:
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in _VALUE_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code = args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    return int(code or 0)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
