"""Command line front end.

Subcommands: diff (derivative tables), ghdiff (generalized difference of two
numbers), metric (distance of two numbers), tabulate (function values), and
check (identity and rule verification). Scales and functions are given in
the small expression language, inline or from a file via @path.

Exit codes are a stable contract:
  0  success, every requested check Verified
  1  configuration or syntax error (details on standard error)
  2  a difference or derivative does not exist, or a residual check failed
  3  a rule's hypothesis failed
"""

from __future__ import annotations

import argparse
import json
import sys

from .dsl import bind_function, eval_function, parse_function, parse_timescale
from .errors import (
    EndpointDerivativeMissing,
    FuzzyNablaError,
    GhNonexistent,
    LengthDirectionUndetermined,
    LimitDisagreement,
    NotInDomain,
    NotInTimeScale,
    SignHypothesisFailed,
    ValidationError,
)
from .fuzzy import gh_diff, GhCase, hausdorff
from .nabla import (
    DEFAULT_CONFIG,
    DiffCase,
    ProbeConfig,
    check_level_consistency,
    check_rho_identity,
    derivative_report,
)
from .rules import (
    Verdict,
    default_residual_tol,
    product_fuzzy,
    product_interval,
    sum_rule,
)
from .timescale import Side

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NONEXISTENT = 2
EXIT_HYPOTHESIS = 3


class _UsageError(Exception):
    pass


class _CliParser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage, which collides with the
    # nonexistence code; remap to the config code instead
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise _UsageError(message)

THEOREMS = (
    "rho-identity",
    "level-consistency",
    "sum",
    "product1",
    "product2",
    "product-interval",
    "characterize",
)


def _read_spec(arg: str) -> str:
    """Inline text, or the contents of a file when prefixed with @."""
    if arg.startswith("@"):
        with open(arg[1:], "r", encoding="utf-8") as fh:
            return fh.read()
    return arg


def _probe_config(args) -> ProbeConfig:
    return ProbeConfig(
        probe_count=args.probes,
        agreement_tol=args.agreement_tol,
        richardson=DEFAULT_CONFIG.richardson,
        subsequence_split=DEFAULT_CONFIG.subsequence_split,
    )


def _select_points(ts, spec: str) -> list[float]:
    if spec == "all-scattered":
        pts = ts.left_scattered_points()
        if not pts:
            raise ValidationError("the scale has no left-scattered points")
        return pts
    if spec.startswith("dense:"):
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError:
            raise ValidationError(f"bad dense point count in {spec!r}")
        if k < 1:
            raise ValidationError("dense point count must be positive")
        cand = [
            t for t in ts.sample_points(max(25, 4 * k))
            if ts.in_kappa(t) and ts.classify(t).left is Side.DENSE
        ]
        if not cand:
            raise ValidationError("the scale has no left-dense points")
        return cand[:k]
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(ts.snap(float(tok)))
        except ValueError:
            raise ValidationError(f"bad point value {tok!r}")
    if not out:
        raise ValidationError("empty point list")
    return sorted(set(out))


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, out_path: str | None) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True) + "\n", out_path)


def _bind(args, want: int | None = 1):
    ts = parse_timescale(_read_spec(args.timescale))
    defs = args.fn
    if not defs:
        raise ValidationError("--fn is required for this command")
    if want is not None and len(defs) != want:
        raise ValidationError(
            f"expected {want} --fn definition(s), got {len(defs)}")
    fns = [
        bind_function(parse_function(_read_spec(d)), ts, K=args.levels)
        for d in defs
    ]
    return ts, fns


def _scalar_fn(args):
    """Compile --scalar-fn into a float -> float callable."""
    from .dsl import eval_expr, parse_scalar

    if not args.scalar_fn:
        raise ValidationError("--scalar-fn is required for product rules")
    expr = parse_scalar(_read_spec(args.scalar_fn))
    return lambda t: float(eval_expr(expr, t))


# -- diff ------------------------------------------------------------------


def cmd_diff(args) -> int:
    ts, (f,) = _bind(args)
    cfg = _probe_config(args)
    points = _select_points(ts, args.points)

    results = [derivative_report(f, ts, t, cfg) for t in points]
    code = EXIT_OK
    if any(r.case is DiffCase.NOT_DIFFERENTIABLE for r in results):
        code = EXIT_NONEXISTENT

    if args.format == "json":
        _emit_json([r.to_dict() for r in results], args.out)
        return code

    lines = ["t,alpha,d_lower,d_upper,case,residual"]
    for r in sorted(results, key=lambda r: r.t):
        if r.value is None:
            lines.append(f"{r.t!r},,,,{r.case.value},{r.residual!r}")
            continue
        for a, lo, hi in r.value.csv_rows():
            lines.append(f"{r.t!r},{a!r},{lo!r},{hi!r},{r.case.value},{r.residual!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return code


# -- tabulate ----------------------------------------------------------------


def cmd_tabulate(args) -> int:
    ts, (f,) = _bind(args)
    points = _select_points(ts, args.points)

    if args.format == "json":
        out = [
            {"t": t, "value": f(t).to_dict()}
            for t in points
        ]
        _emit_json(out, args.out)
        return EXIT_OK

    lines = ["t,alpha,lower,upper"]
    for t in points:
        for a, lo, hi in f(t).csv_rows():
            lines.append(f"{t!r},{a!r},{lo!r},{hi!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# -- ghdiff / metric ---------------------------------------------------------


def _eval_number(src: str, at: float, K: int):
    d = parse_function(_read_spec(src))
    return eval_function(d, at, K)


def cmd_ghdiff(args) -> int:
    u = _eval_number(args.u, args.at, args.levels)
    v = _eval_number(args.v, args.at, args.levels)
    res = gh_diff(u, v)

    if args.format == "json":
        out = {
            "case": res.case.value,
            "levels": res.value.csv_rows() if res.value is not None else None,
            "diagnostics": res.diagnostics,
        }
        _emit_json(out, args.out)
        return EXIT_OK if res.case is not GhCase.NONE else EXIT_NONEXISTENT

    lines = [f"case,{res.case.value}"]
    if res.value is not None:
        lines.append("alpha,lower,upper")
        for a, lo, hi in res.value.csv_rows():
            lines.append(f"{a!r},{lo!r},{hi!r}")
    else:
        for key, msg in sorted(res.diagnostics.items()):
            lines.append(f"# {key}: {msg}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if res.case is not GhCase.NONE else EXIT_NONEXISTENT


def cmd_metric(args) -> int:
    u = _eval_number(args.u, args.at, args.levels)
    v = _eval_number(args.v, args.at, args.levels)
    _emit(f"{hausdorff(u, v)!r}\n", args.out)
    return EXIT_OK


# -- check -------------------------------------------------------------------


def _verdict_code(verdicts) -> int:
    if any(v is Verdict.HYPOTHESIS_FAILED for v in verdicts):
        return EXIT_HYPOTHESIS
    if any(v is Verdict.RESIDUAL_EXCEEDED for v in verdicts):
        return EXIT_NONEXISTENT
    return EXIT_OK


def _residual_rows(args, checker) -> int:
    """Shared driver for the two identity checks with scalar residuals."""
    ts, (f,) = _bind(args)
    cfg = _probe_config(args)
    points = _select_points(ts, args.points)

    rows = []
    verdicts = []
    for t in points:
        tol = args.residual_tol or default_residual_tol(ts, t)
        residual = checker(f, ts, t, cfg)
        verdict = Verdict.VERIFIED if residual <= tol else Verdict.RESIDUAL_EXCEEDED
        verdicts.append(verdict)
        rows.append({"t": t, "residual": residual, "tol": tol,
                     "verdict": verdict.value})

    if args.format == "json":
        _emit_json(rows, args.out)
    else:
        lines = ["t,residual,tol,verdict"]
        for r in rows:
            lines.append(f"{r['t']!r},{r['residual']!r},{r['tol']!r},{r['verdict']}")
        _emit("\n".join(lines) + "\n", args.out)
    return _verdict_code(verdicts)


def _rule_rows(args, reports_by_t) -> int:
    rows = [{"t": t, **rep.to_dict()} for t, rep in reports_by_t]
    verdicts = [rep.verdict for _, rep in reports_by_t]

    if args.format == "json":
        _emit_json(rows, args.out)
    else:
        lines = ["t,rule,verdict,residual,hypotheses"]
        for t, rep in reports_by_t:
            hyp = ";".join(
                f"{h.name}={'pass' if h.passed else 'FAIL'}"
                for h in rep.hypothesis_checks
            )
            lines.append(f"{t!r},{rep.rule},{rep.verdict.value},{rep.residual!r},{hyp}")
        _emit("\n".join(lines) + "\n", args.out)
    return _verdict_code(verdicts)


def _check_named_sign(rep, theorem: str) -> None:
    """product1 and product2 each pin one sign of fs * nabla_fs."""
    sigma = rep.extras.get("sigma", 0.0)
    wanted = sigma > 0 if theorem == "product1" else sigma < 0
    if not wanted:
        from .rules import HypothesisCheck

        rep.hypothesis_checks.append(HypothesisCheck(
            "named-theorem-sign", False,
            f"{theorem} needs fs*nabla_fs {'>' if theorem == 'product1' else '<'} 0, "
            f"got {sigma:.6g}"))
        rep.verdict = Verdict.HYPOTHESIS_FAILED


def cmd_check(args) -> int:
    theorem = args.theorem
    if theorem == "rho-identity":
        return _residual_rows(args, check_rho_identity)
    if theorem == "level-consistency":
        return _residual_rows(args, check_level_consistency)

    if theorem == "characterize":
        ts, (f,) = _bind(args)
        cfg = _probe_config(args)
        points = _select_points(ts, args.points)
        results = [derivative_report(f, ts, t, cfg) for t in points]
        if args.format == "json":
            _emit_json([r.to_dict() for r in results], args.out)
        else:
            lines = ["t,case,residual"]
            for r in results:
                lines.append(f"{r.t!r},{r.case.value},{r.residual!r}")
            _emit("\n".join(lines) + "\n", args.out)
        bad = any(r.case is DiffCase.NOT_DIFFERENTIABLE for r in results)
        return EXIT_NONEXISTENT if bad else EXIT_OK

    if theorem == "sum":
        ts, (f, g) = _bind(args, want=2)
        cfg = _probe_config(args)
        points = _select_points(ts, args.points)
        reports = [
            (t, sum_rule(f, g, ts, t, cfg, tol=args.residual_tol))
            for t in points
        ]
        return _rule_rows(args, reports)

    # product rules: one fuzzy --fn plus --scalar-fn
    ts, (g,) = _bind(args)
    fs = _scalar_fn(args)
    cfg = _probe_config(args)
    points = _select_points(ts, args.points)
    reports = []
    for t in points:
        if theorem == "product-interval":
            rep = product_interval(fs, g, ts, t, cfg, tol=args.residual_tol)
        else:
            rep = product_fuzzy(fs, g, ts, t, cfg, tol=args.residual_tol)
            _check_named_sign(rep, theorem)
        reports.append((t, rep))
    return _rule_rows(args, reports)


# -- argument plumbing -------------------------------------------------------


def _add_run_flags(p, with_points: bool = True) -> None:
    p.add_argument("--timescale", required=True,
                   help="scale expression, or @file")
    p.add_argument("--fn", action="append",
                   help="function definition, or @file (repeatable)")
    if with_points:
        p.add_argument("--points", default="all-scattered",
                       help='"1,2,3", "all-scattered" or "dense:k"')
    _add_tuning_flags(p)
    _add_output_flags(p)


def _add_tuning_flags(p) -> None:
    p.add_argument("--levels", type=int, default=100, metavar="K",
                   help="level grid resolution (default 100)")
    p.add_argument("--probes", type=int, default=DEFAULT_CONFIG.probe_count,
                   metavar="N", help="probes per approach stream")
    p.add_argument("--agreement-tol", type=float,
                   default=DEFAULT_CONFIG.agreement_tol,
                   help="limit agreement tolerance")
    p.add_argument("--residual-tol", type=float, default=None,
                   help="identity residual tolerance (default: by point class)")


def _add_output_flags(p) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _CliParser(
        prog="fuzzynabla",
        description="backward fuzzy calculus on time scales",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diff", help="derivative table over selected points")
    _add_run_flags(p)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("tabulate", help="function values over selected points")
    _add_run_flags(p)
    p.set_defaults(func=cmd_tabulate)

    p = sub.add_parser("ghdiff", help="generalized difference of two numbers")
    p.add_argument("u", help="minuend definition, or @file")
    p.add_argument("v", help="subtrahend definition, or @file")
    p.add_argument("--at", type=float, default=0.0,
                   help="evaluation point for defs mentioning t")
    p.add_argument("--levels", type=int, default=100, metavar="K")
    _add_output_flags(p)
    p.set_defaults(func=cmd_ghdiff)

    p = sub.add_parser("metric", help="distance between two numbers")
    p.add_argument("u")
    p.add_argument("v")
    p.add_argument("--at", type=float, default=0.0)
    p.add_argument("--levels", type=int, default=100, metavar="K")
    _add_output_flags(p)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("check", help="run an identity or rule checker")
    p.add_argument("theorem", choices=THEOREMS)
    p.add_argument("--scalar-fn", default=None,
                   help="real-valued factor for product rules, or @file")
    _add_run_flags(p)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (GhNonexistent, LimitDisagreement, EndpointDerivativeMissing,
            LengthDirectionUndetermined) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NONEXISTENT
    except SignHypothesisFailed as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (ValidationError, NotInTimeScale, NotInDomain, FuzzyNablaError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
