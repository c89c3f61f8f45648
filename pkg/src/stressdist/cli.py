"""Command-line front end.

Exit codes: 0 success, 1 computation or golden-table failure, 2 budget
exceeded, 64 usage error. All outputs are in tau = 1 units unless ``--tau``
is given; smeared field observables then scale as tau^-2 per power.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import cft2d, dist, func, wick4d
from .errors import Intractable, StressDistError
from .exact import PiMonomial, as_fraction, decimal_str, fraction_str, is_exact

EXIT_OK, EXIT_FAIL, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 64
OUTPUT_DIR_ENV = "STRESSDIST_OUTPUT_DIR"

FIG1_UNIFORM = 400
FIG1_LOG = 100
FIG1_X_MAX = 0.3
FIG1_LOG_START = 1e-6

WINDOW_CHOICES = {"gaussian": func.GAUSSIAN, "lorentzian": func.LORENTZIAN,
                  "squared-lorentzian": func.SQUARED_LORENTZIAN}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _number(text: str):
    """Exact rational when the text allows it ("1", "1/2", "0.25"), else float."""
    try:
        return as_fraction(text) if "e" not in text.lower() else float(text)
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _render(v):
    """JSON-friendly value: exact strings for rationals, floats otherwise."""
    if isinstance(v, PiMonomial):
        return {"exact": str(v), "decimal": decimal_str(float(v))}
    if is_exact(v):
        return fraction_str(v)
    return float(v)


def _dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _csv(rows, header, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _text_table(rows, header) -> str:
    cells = [[str(h) for h in header]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells) + "\n"


def _kv_output(data: dict, fmt: str) -> str:
    """Flat key/value report in any of the three formats."""
    if fmt == "json":
        return _dumps({k: _render(v) for k, v in data.items()})
    rows = []
    for k, v in data.items():
        if isinstance(v, PiMonomial):
            rows.append([k, decimal_str(float(v)), str(v)])
        elif is_exact(v):
            rows.append([k, decimal_str(Fraction(v)), fraction_str(v)])
        else:
            rows.append([k, decimal_str(v), ""])
    if fmt == "csv":
        return _csv(rows, ["quantity", "value", "exact"])
    return _text_table(rows, ["quantity", "value", "exact"])


# -- distributions by case ---------------------------------------------------

def _case_distribution(case, c, tau, window):
    """(float law, exact physical parameters or None) for a named case."""
    params = cft2d.CftParams(c, float(tau))
    exact_ok = is_exact(c) and tau == 1
    if case == "chiral":
        d = cft2d.chiral_distribution(params)
        ex = cft2d.chiral_distribution(params, exact=True) if exact_ok else None
    elif case == "energy-density":
        d = cft2d.energy_density_distribution(params)
        ex = cft2d.energy_density_distribution(params, exact=True) if is_exact(c) else None
    elif case == "phi2":
        w = wick4d.WindowSpectrum(WINDOW_CHOICES[window], 1)
        ex = dist.fit_from_moments(wick4d.moments(3, w))
        # the smeared field square scales as tau^-2
        d = ex.physical().rescaled(float(tau) ** -2)
        if tau != 1:
            ex = None
    else:
        raise UsageError(f"unknown case {case!r}")
    return d, (ex.physical_params() if ex is not None else None)


def cmd_dist(args) -> tuple[int, str]:
    if args.case == "phi2" and args.window not in ("lorentzian", "squared-lorentzian"):
        raise UsageError("phi2 needs --window lorentzian or squared-lorentzian")
    d, ex = _case_distribution(args.case, args.c, args.tau, args.window)
    report = {"alpha": float(d.alpha), "beta": float(d.beta), "omega0": float(d.omega0)}
    if ex is not None:
        report.update({f"{k}_exact": v for k, v in ex.items()})
    report["prob_negative"] = dist.prob_negative(d)
    report["qi_bound"] = -float(d.omega0)
    return EXIT_OK, _kv_output(report, args.format)


def cmd_table1(args) -> tuple[int, str]:
    budget = args.budget
    if args.order > budget:
        raise Intractable(f"order {args.order} exceeds the budget {budget}; raise --budget")
    seq = wick4d.moments(args.order, wick4d.WindowSpectrum(func.LORENTZIAN, 1),
                         budget=max(budget, 2))
    rows, failed = [], False
    for n, v in enumerate(seq.values):
        if n < len(wick4d.TABLE1):
            ok = v == wick4d.TABLE1[n]
            failed |= not ok
            status = "PASS" if ok else "FAIL"
        else:
            status = "NEW"
        rows.append((n, fraction_str(v), status))
    code = EXIT_FAIL if failed else EXIT_OK
    if args.format == "json":
        data = {"normalization": "M_n = (4 pi tau)^(2n) <X^n>",
                "rows": [{"n": n, "M_n": m, "exact": str(PiMonomial(Fraction(m), 0)),
                          "status": s} for n, m, s in rows]}
        return code, _dumps(data)
    if args.format == "csv":
        return code, _csv(rows, ["n", "M_n", "status"])
    return code, _text_table(rows, ["n", "M_n", "status"])


def fig1_grid(x0: float, x_max: float = FIG1_X_MAX, uniform: int = FIG1_UNIFORM,
              log_points: int = FIG1_LOG, log_start: float = FIG1_LOG_START) -> np.ndarray:
    """Uniform points on ``(-x0, x_max]`` plus log-spaced points near ``-x0``.

    The log points sit at distances from ``log_start`` up to the first
    uniform step, resolving the integrable endpoint singularity.
    """
    if x_max <= -x0:
        raise UsageError("x-max must exceed the lower endpoint")
    uni = np.linspace(-x0, x_max, uniform + 1)[1:]
    step = uni[0] + x0
    if log_start >= step:
        raise UsageError("log-refinement start must lie below the first uniform step")
    near = -x0 + np.logspace(math.log10(log_start), math.log10(step), log_points,
                             endpoint=False)
    return np.concatenate([near, uni])


def cmd_fig1(args) -> tuple[int, str]:
    d = cft2d.energy_density_distribution(cft2d.CftParams(args.c, 1.0))
    x0 = float(d.omega0)
    xs = fig1_grid(x0, args.x_max, args.uniform, args.log_points)
    ps = dist.pdf(d, xs)
    if args.format == "json":
        data = {"x0": x0, "alpha": float(d.alpha), "beta": float(d.beta),
                "points": [[float(x), float(p)] for x, p in zip(xs, ps)]}
        return EXIT_OK, _dumps(data)
    rows = [(repr(float(x)), repr(float(p))) for x, p in zip(xs, ps)]
    meta = [f"x0={x0!r}", f"alpha={float(d.alpha)!r}", f"beta={float(d.beta)!r}"]
    return EXIT_OK, _csv(rows, ["x", "P"], meta)


def cmd_sample(args) -> tuple[int, str]:
    if args.n < 1:
        raise UsageError("-n must be positive")
    d, _ = _case_distribution(args.case, args.c, args.tau, args.window)
    xs = dist.sample(d, args.n, args.seed)
    if args.format == "json":
        return EXIT_OK, _dumps({"seed": args.seed, "samples": [float(x) for x in xs]})
    if args.format == "csv":
        return EXIT_OK, _csv(((repr(float(x)),) for x in xs), ["x"])
    summary = {"n": args.n, "seed": args.seed, "mean": float(np.mean(xs)),
               "min": float(np.min(xs)), "fraction_negative": float(np.mean(xs < 0)),
               "lower_endpoint": -float(d.omega0)}
    return EXIT_OK, _kv_output(summary, "text")


def cmd_moments(args) -> tuple[int, str]:
    if args.order < 0:
        raise UsageError("--order must be nonnegative")
    if args.engine == "cft2d":
        seq = cft2d.moments_recursion_gaussian(cft2d.CftParams(args.c), args.order)
        label = "gamma_n = (pi tau^2)^n G_n"
    else:
        if args.window not in ("lorentzian", "squared-lorentzian"):
            raise UsageError("wick4d needs --window lorentzian or squared-lorentzian")
        w = wick4d.WindowSpectrum(WINDOW_CHOICES[args.window], args.p)
        seq = wick4d.moments(args.order, w, budget=args.budget)
        label = "M_n = (4 pi tau)^(2n) <X^n>"
    rows = [(n, fraction_str(v) if is_exact(v) else decimal_str(v),
             decimal_str(Fraction(v) if is_exact(v) else v))
            for n, v in enumerate(seq.values)]
    if args.format == "json":
        data = {"engine": args.engine, "normalization": label, "scale": str(seq.scale),
                "moments": [{"n": n, "exact": e, "decimal": dec} for n, e, dec in rows]}
        return EXIT_OK, _dumps(data)
    if args.format == "csv":
        return EXIT_OK, _csv(rows, ["n", "exact", "decimal"])
    return EXIT_OK, f"# {label}\n" + _text_table(rows, ["n", "exact", "decimal"])


def cmd_qi(args) -> tuple[int, str]:
    kind = WINDOW_CHOICES[args.window]
    tau = float(args.tau)
    f = func.SamplingFunction(kind, tau)
    r = func.qi_integral_exact(kind)
    report = {}
    if args.theory == "cft2d":
        # -(c / 12 pi) integral (d sqrt f)^2 for each chiral half
        c = args.c
        if is_exact(c) and args.tau == 1:
            report["bound_exact"] = PiMonomial(-as_fraction(c) * r / 12, -1)
        report["bound"] = func.qi_functional(f, float(c) / (12 * math.pi))
    else:
        if kind == func.GAUSSIAN:
            raise UsageError("the phi2 bounds are available for Lorentzian windows only")
        report["general_bound"] = func.qi_functional(f, 1 / (8 * math.pi**2))
        q = wick4d.conjectured_qi(wick4d.WindowSpectrum(kind, 1))
        report["conjectured_bound"] = -float(q.omega0) / tau**2
        if args.tau == 1:
            report["general_bound_exact"] = PiMonomial(-r / 8, -2)
            report["conjectured_bound_exact"] = q.bound
        report["ratio"] = q.ratio_vs_general_bound
    return EXIT_OK, _kv_output(report, args.format)


# -- parser ------------------------------------------------------------------

def _positive(text):
    v = _number(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    def common():
        # fresh per subcommand: parents share Action objects, and so their defaults
        c = argparse.ArgumentParser(add_help=False)
        c.add_argument("--format", choices=("text", "json", "csv"), default="text")
        c.add_argument("--output", "-o", help="write to this file instead of stdout "
                       f"(relative paths resolve against ${OUTPUT_DIR_ENV} if set)")
        return c

    p = _Parser(prog="stressdist",
                description="Probability distributions of smeared stress tensors and "
                            "Wick squares. Outputs are in tau = 1 units by default.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("dist", parents=[common()], help="shifted-Gamma law of a case")
    d.add_argument("--case", choices=("chiral", "energy-density", "phi2"), required=True)
    d.add_argument("-c", type=_positive, default=1, help="central charge")
    d.add_argument("--tau", type=_positive, default=1)
    d.add_argument("--window", choices=tuple(WINDOW_CHOICES), default="lorentzian")
    d.set_defaults(run=cmd_dist)

    t = sub.add_parser("table1", parents=[common()],
                       help="exact Lorentzian :phi^2: moments checked against the reference")
    t.add_argument("--order", type=int, default=8)
    t.add_argument("--budget", type=int, default=wick4d.TABLE1_BUDGET)
    t.set_defaults(run=cmd_table1)

    f = sub.add_parser("fig1", parents=[common()], help="energy-density probability density")
    f.add_argument("-c", type=_positive, default=1)
    f.add_argument("--x-max", type=float, default=FIG1_X_MAX)
    f.add_argument("--uniform", type=int, default=FIG1_UNIFORM)
    f.add_argument("--log-points", type=int, default=FIG1_LOG)
    f.set_defaults(run=cmd_fig1, format="csv")

    s = sub.add_parser("sample", parents=[common()], help="draw from a case's distribution")
    s.add_argument("--case", choices=("chiral", "energy-density", "phi2"), required=True)
    s.add_argument("-c", type=_positive, default=1)
    s.add_argument("--tau", type=_positive, default=1)
    s.add_argument("--window", choices=tuple(WINDOW_CHOICES), default="lorentzian")
    s.add_argument("-n", type=int, default=100000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(run=cmd_sample, format="csv")

    m = sub.add_parser("moments", parents=[common()], help="exact moment sequences")
    m.add_argument("--engine", choices=("cft2d", "wick4d"), required=True)
    m.add_argument("-c", type=_positive, default=1)
    m.add_argument("--order", type=int, default=8)
    m.add_argument("--window", choices=tuple(WINDOW_CHOICES), default="lorentzian")
    m.add_argument("--p", type=int, choices=(1, 3), default=1,
                   help="1 for the field square, 3 for the squared time derivative")
    m.add_argument("--budget", type=int, default=wick4d.DEFAULT_BUDGET)
    m.set_defaults(run=cmd_moments)

    q = sub.add_parser("qi", parents=[common()], help="quantum inequality bounds")
    q.add_argument("--window", choices=tuple(WINDOW_CHOICES), default="gaussian")
    q.add_argument("--theory", choices=("cft2d", "phi2"), default="cft2d")
    q.add_argument("-c", type=_positive, default=1)
    q.add_argument("--tau", type=_positive, default=1)
    q.set_defaults(run=cmd_qi)
    return p


def _resolve_output(path: str) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, text = args.run(args)
    except UsageError as exc:
        print(f"stressdist: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Intractable as exc:
        print(f"stressdist: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except StressDistError as exc:
        print(f"stressdist: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.output:
        with open(_resolve_output(args.output), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
