"""Command-line front end.

Exit codes: 0 when every check passes, 2 when a numeric check fails, 1 on
usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .covariant import (
    DESIGNS,
    CovariantSeed,
    DesignError,
    MeasurementClass,
    admissible_mask,
    discretize,
    load_directions,
    min_eigenvalues,
)
from .fidelity import (
    FidelitySpec,
    NAMED_FUNCTIONS,
    NAMED_SPECS,
    average_fidelity,
    discrete_average_fidelity,
)
from .montecarlo import InadmissibleSeedError, estimate_fidelity, estimate_locc_strategy
from .operators import eigenvalues, partial_spin_flip
from .optimize import optimize

EXIT_OK, EXIT_USAGE, EXIT_CHECK = 0, 1, 2
MC_SIGMAS = 4.0

CLOSED_FORMS = {
    ("overlap", MeasurementClass.COLLECTIVE_PARALLEL): 3 / 4,
    ("overlap", MeasurementClass.COLLECTIVE_ANTIPARALLEL): 1 / 2 + 1 / (2 * math.sqrt(3)),
    ("overlap", MeasurementClass.LOCC): 1 / 2 + 1 / (3 * math.sqrt(2)),
    ("plane", MeasurementClass.COLLECTIVE_PARALLEL): 4 / 5,
    ("plane", MeasurementClass.COLLECTIVE_ANTIPARALLEL): 11 / 15,
    ("plane", MeasurementClass.LOCC): 11 / 15,
}
LOCC_STRATEGY_VALUE = 1 / 2 + 1 / (3 * math.sqrt(2))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument types ---------------------------------------------------------

def fidelity_arg(text: str):
    """Named fidelity key or comma-separated Legendre coefficients."""
    if text in NAMED_SPECS:
        return text
    try:
        coeffs = [float(c) for c in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown fidelity {text!r}; use one of {sorted(NAMED_SPECS)} or f0,f1,f2"
        ) from None
    if not all(math.isfinite(c) for c in coeffs):
        raise argparse.ArgumentTypeError(f"malformed coefficients {text!r}")
    coeffs += [0.0] * (3 - len(coeffs))
    return FidelitySpec(coeffs[0], coeffs[1], coeffs[2], tuple(coeffs[3:]))


def class_arg(text: str):
    if text.lower() == "all":
        return list(MeasurementClass)
    try:
        return [MeasurementClass.parse(text)]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def spec_of(fidelity) -> FidelitySpec:
    return NAMED_SPECS[fidelity] if isinstance(fidelity, str) else fidelity


def function_of(fidelity):
    return NAMED_FUNCTIONS[fidelity] if isinstance(fidelity, str) else fidelity


def fidelity_label(fidelity) -> str:
    if isinstance(fidelity, str):
        return fidelity
    return ",".join(_num(c) for c in fidelity.coefficients)


# -- report assembly and rendering -----------------------------------------

def _num(x) -> str:
    return format(float(x), ".17g")


def check(name, expected, actual, tolerance) -> dict:
    ok = bool(abs(actual - expected) <= tolerance)
    return {"name": name, "expected": expected, "actual": actual, "tolerance": tolerance, "pass": ok}


class Report:
    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.rows: list[dict] = []
        self.checks: list[dict] = []

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def as_dict(self) -> dict:
        return {"command": self.command, "config": self.config, "rows": self.rows, "checks": self.checks}


def _json(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    return json.dumps(str(obj))


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _num(v)
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    return str(v)


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    if report.rows:
        writer = csv.writer(buf, lineterminator="\n")
        header = list(report.rows[0])
        writer.writerow(header)
        for row in report.rows:
            writer.writerow([_cell(row[k]) for k in header])
    return buf.getvalue()


def render_json(report: Report) -> str:
    return _json(report.as_dict()) + "\n"


# -- commands ----------------------------------------------------------------

def run_optimize(args) -> Report:
    report = Report("optimize", _config(args))
    spec = spec_of(args.fidelity)
    for cls in args.classes:
        opt = optimize(spec, cls)
        report.rows.append(opt.to_dict())
        key = (args.fidelity, cls) if isinstance(args.fidelity, str) else None
        if key in CLOSED_FORMS:
            report.checks.append(check(f"optimum:{args.fidelity}:{cls}", CLOSED_FORMS[key], opt.value, 1e-12))
    return report


def run_region(args) -> Report:
    if args.grid < 2:
        raise UsageError("grid must be at least 2")
    a_lo, a_hi, g_lo, g_hi = args.window
    alpha, gamma = np.meshgrid(
        np.linspace(a_lo, a_hi, args.grid), np.linspace(g_lo, g_hi, args.grid), indexing="ij"
    )
    alpha, gamma = alpha.ravel(), gamma.ravel()
    masks = {cls: admissible_mask(alpha, gamma, cls) for cls in MeasurementClass}
    eig, eig_flip = min_eigenvalues(alpha, gamma)

    report = Report("region", _config(args))
    for i in range(alpha.size):
        report.rows.append({
            "alpha": float(alpha[i]),
            "gamma": float(gamma[i]),
            "parallel": bool(masks[MeasurementClass.COLLECTIVE_PARALLEL][i]),
            "antiparallel": bool(masks[MeasurementClass.COLLECTIVE_ANTIPARALLEL][i]),
            "locc_necessary": bool(masks[MeasurementClass.LOCC][i]),
            "min_eig": float(eig[i]),
            "min_eig_flipped": float(eig_flip[i]),
        })
    tol = args.tol
    relevant = {
        MeasurementClass.COLLECTIVE_PARALLEL: eig,
        MeasurementClass.COLLECTIVE_ANTIPARALLEL: eig_flip,
        MeasurementClass.LOCC: np.minimum(eig, eig_flip),
    }
    for cls, lam in relevant.items():
        decided = np.abs(lam) > tol
        disagree = int(np.sum((masks[cls] != (lam >= -tol)) & decided))
        report.checks.append(check(f"region_vs_eigenvalues:{cls}", 0, disagree, 0))
    return report


def _seed_targets(args):
    if args.alpha is not None or args.gamma is not None:
        if args.alpha is None or args.gamma is None:
            raise UsageError("--alpha and --gamma must be given together")
        seed = CovariantSeed(args.alpha, args.gamma)
        return [("custom", None, seed, average_fidelity(seed, spec_of(args.fidelity)))]
    spec = spec_of(args.fidelity)
    return [(str(cls), cls, o.seed, o.value) for cls in args.classes for o in [optimize(spec, cls)]]


def _mc_row(label, seed, analytic, rep, status="") -> dict:
    return {
        "label": label,
        "region_status": status,
        "alpha": seed.alpha if seed else float("nan"),
        "gamma": seed.gamma if seed else float("nan"),
        "analytic": analytic,
        "estimate": rep.mean_fidelity,
        "standard_error": rep.standard_error,
        "z": rep.z_score(analytic),
        "trials": rep.trials,
        "acceptance_rate": rep.acceptance_rate,
    }


def run_simulate(args) -> Report:
    report = Report("simulate", _config(args))
    f = function_of(args.fidelity)
    for label, cls, seed, analytic in _seed_targets(args):
        try:
            rep = estimate_fidelity(seed, f, args.trials, args.rng_seed, workers=args.workers)
        except InadmissibleSeedError as exc:
            raise UsageError(str(exc)) from None
        report.rows.append(_mc_row(label, seed, analytic, rep, cls.region_status if cls else ""))
        report.checks.append(check(f"monte_carlo:{label}", analytic, rep.mean_fidelity, MC_SIGMAS * rep.standard_error))
    return report


def run_discretize(args) -> Report:
    if args.directions:
        try:
            dirs = load_directions(args.directions)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read directions: {exc}") from None
    else:
        dirs = DESIGNS[args.design]()
    seed = CovariantSeed(args.alpha if args.alpha is not None else 0.0,
                         args.gamma if args.gamma is not None else 0.0)
    try:
        povm = discretize(seed, dirs)
    except DesignError as exc:
        raise UsageError(str(exc)) from None
    report = Report("discretize", _config(args))
    for n, w, op in povm.elements:
        report.rows.append({
            "nx": float(n[0]), "ny": float(n[1]), "nz": float(n[2]), "weight": float(w),
            "min_eig": float(eigenvalues(op)[0]),
            "min_eig_flipped": float(eigenvalues(partial_spin_flip(op))[0]),
        })
    report.checks.append(check("completeness", 0.0, povm.completeness_residual(), 1e-12))
    spec = spec_of(args.fidelity)
    report.checks.append(check(
        "discrete_average_fidelity", average_fidelity(seed, spec),
        discrete_average_fidelity(povm, function_of(args.fidelity)), 1e-10,
    ))
    return report


def run_reproduce(args) -> Report:
    report = Report("reproduce", _config(args))
    for (key, cls), closed in CLOSED_FORMS.items():
        opt = optimize(NAMED_SPECS[key], cls)
        label = f"{key}:{cls}"
        report.checks.append(check(f"analytic:{label}", closed, opt.value, 1e-12))
        rep = estimate_fidelity(opt.seed, key, args.trials, args.rng_seed, workers=args.workers)
        report.rows.append(_mc_row(label, opt.seed, opt.value, rep, cls.region_status))
        report.checks.append(check(f"monte_carlo:{label}", closed, rep.mean_fidelity, MC_SIGMAS * rep.standard_error))
    rep = estimate_locc_strategy(args.trials, args.rng_seed, workers=args.workers)
    label = "overlap:LOCC-bisectrix-strategy"
    report.rows.append(_mc_row(label, None, LOCC_STRATEGY_VALUE, rep, "strategy"))
    report.checks.append(check(f"monte_carlo:{label}", LOCC_STRATEGY_VALUE, rep.mean_fidelity, MC_SIGMAS * rep.standard_error))
    return report


COMMANDS = {
    "optimize": run_optimize,
    "region": run_region,
    "simulate": run_simulate,
    "discretize": run_discretize,
    "reproduce": run_reproduce,
}


def _config(args) -> dict:
    out = {}
    for k, v in vars(args).items():
        if k == "classes":
            out["class"] = [str(c) for c in v]
        elif k == "fidelity":
            out[k] = fidelity_label(v)
        else:
            out[k] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv", dest="output_format")
    common.add_argument("--output", dest="output_path", help="write here instead of stdout")

    parser = _Parser(prog="twospin", description="Covariant measurements on two spins.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def fidelity_opt(p):
        p.add_argument("--fidelity", type=fidelity_arg, default="overlap",
                       help="overlap, plane, or Legendre coefficients f0,f1,f2[,...]")

    def class_opt(p):
        p.add_argument("--class", type=class_arg, default=list(MeasurementClass), dest="classes",
                       help="parallel, antiparallel, locc or all (default)")

    def mc_opts(p, trials):
        p.add_argument("--trials", type=positive_int, default=trials)
        p.add_argument("--rng-seed", type=nonneg_int, default=2001)
        p.add_argument("--workers", type=positive_int, default=1)

    def seed_opts(p):
        p.add_argument("--alpha", type=finite_float)
        p.add_argument("--gamma", type=finite_float)

    p = sub.add_parser("optimize", parents=[common], help="optimal seed and fidelity per class")
    fidelity_opt(p)
    class_opt(p)

    p = sub.add_parser("region", parents=[common], help="admissibility table over an (alpha, gamma) grid")
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--window", type=finite_float, nargs=4, default=[-3.0, 3.0, -3.0, 3.0],
                   metavar=("ALPHA_MIN", "ALPHA_MAX", "GAMMA_MIN", "GAMMA_MAX"))
    p.add_argument("--tol", type=finite_float, default=1e-9)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate at optimal or given seeds")
    fidelity_opt(p)
    class_opt(p)
    mc_opts(p, 100_000)
    seed_opts(p)

    p = sub.add_parser("discretize", parents=[common], help="finite POVM on a spherical 2-design")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--design", choices=sorted(DESIGNS), default="tetrahedron")
    group.add_argument("--directions", help="text file, one unit vector per line")
    fidelity_opt(p)
    seed_opts(p)

    p = sub.add_parser("reproduce", parents=[common], help="all optimal fidelities with Monte Carlo checks")
    mc_opts(p, 1_000_000)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"twospin {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render_json(report) if args.output_format == "json" else render_csv(report)
    if args.output_path:
        with open(args.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for c in report.checks:
        if not c["pass"]:
            print(f"FAILED {c['name']}: expected {c['expected']!r}, got {c['actual']!r} "
                  f"(tolerance {c['tolerance']!r})", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_CHECK
