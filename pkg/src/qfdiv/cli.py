"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 domain violation,
4 non-convergence, 5 certification failure.
"""

import argparse
import csv
import io as _io
import logging
import sys

import numpy as np

from . import functions, harness
from .divergences import (fidelity, petz_f_divergence, petz_renyi,
                          quantum_relative_entropy, sandwiched_renyi)
from .errors import DomainViolation, InvalidInput, NonConvergence, NumericalFailure
from .io import dumps, format_number, read_json, read_matrix, write_matrix
from .optimizer import OptimizerConfig, optimize_tau_generic, optimized_f_divergence

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DOMAIN = 3
EXIT_NONCONVERGENCE = 4
EXIT_FAILED = 5

KINDS = ("relative-entropy", "petz-renyi", "sandwiched", "petz-f", "fidelity")
F_NAMES = (functions.NEG_LOG, functions.NEG_POWER, functions.POWER, functions.CUSTOM)
CHECK_ALIASES = {"partial-trace": harness.DPI_PARTIAL_TRACE, "channel": harness.DPI_CHANNEL,
                 "petz": harness.PETZ_DPI}
LIMIT_KS = (1, 2, 3, 4)
LIMIT_TOL = 1e-3
# the Renyi formulas divide a rounded log by (alpha - 1); allow that much noise
LIMIT_SLACK = 64 * np.finfo(float).eps

log = logging.getLogger("qfdiv")


def _dims(text):
    try:
        dims = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 2,3, got {text!r}")
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError("dims must be positive integers")
    return dims


def _floats(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _seed(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--x", required=True, help="matrix JSON for X")
    inputs.add_argument("--y", required=True, help="matrix JSON for Y")

    fsel = argparse.ArgumentParser(add_help=False)
    fsel.add_argument("--f", choices=F_NAMES, default=functions.NEG_LOG)
    fsel.add_argument("--alpha", type=float)
    fsel.add_argument("--beta", type=float)
    fsel.add_argument("--expr", help="expression in x for --f custom, e.g. --expr=-x**0.25")
    fsel.add_argument("--assert-anti-monotone", action="store_true",
                      help="declare a custom f operator anti-monotone")

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--max-iterations", type=_positive_int, default=500)
    opt.add_argument("--tol", type=float, default=1e-9)
    opt.add_argument("--restarts", type=int, default=0)

    trials = argparse.ArgumentParser(add_help=False)
    trials.add_argument("--seed", type=_seed, default=0)
    trials.add_argument("--workers", type=_positive_int, default=1)
    trials.add_argument("--witness-dir", help="directory for worst-case witness matrices")

    p = argparse.ArgumentParser(prog="qfdiv", description="Optimized quantum f-divergences.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", parents=[common, inputs, fsel],
                       help="evaluate a divergence on X, Y")
    c.add_argument("--kind", choices=KINDS, required=True)
    c.add_argument("--alphas", type=_floats, help="comma-separated alpha grid (sweep)")

    o = sub.add_parser("optimize", parents=[common, inputs, fsel, opt],
                       help="maximize the objective over tau")
    o.add_argument("--witness-out", help="write the optimal tau as matrix JSON")
    o.add_argument("--generic", action="store_true",
                   help="use the iterative optimizer even when a closed form exists")
    o.add_argument("--seed", type=_seed, default=0)

    d = sub.add_parser("dpi", parents=[common, fsel, opt, trials],
                       help="randomized certification of one inequality")
    d.add_argument("--check", default="partial-trace",
                   choices=sorted(set(CHECK_ALIASES) | set(harness.CHECKS)))
    d.add_argument("--dims", type=_dims)
    d.add_argument("--trials", type=_positive_int, default=200)
    d.add_argument("--tolerance", type=float)

    s = sub.add_parser("suite", parents=[common, opt, trials],
                       help="run the certification suite")
    s.add_argument("--trials", type=_positive_int, default=100)
    s.add_argument("--spec", help="JSON list of trial specs (default: built-in suite)")

    sub.add_parser("limit-check", parents=[common, inputs],
                   help="alpha -> 1 consistency of both Renyi families")
    return p


# ---------------------------------------------------------------------------
# output

def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        # JSON has no infinities; keep both formats in step
        return format_number(v) if np.isfinite(v) else ""
    return str(v)


def _render(rows, fmt, extra=None) -> str:
    if fmt == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        keys = list(rows[0])
        writer.writerow(keys)
        for r in rows:
            writer.writerow([_cell(r[k]) for k in keys])
        return buf.getvalue()
    body = rows[0] if len(rows) == 1 and extra is None else rows
    if extra is not None:
        body = dict(extra, rows=rows)
    return dumps(body) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def _function(args):
    if args.f == functions.CUSTOM:
        if not args.expr:
            raise InvalidInput("--f custom needs --expr")
        return functions.from_expression(args.expr, args.assert_anti_monotone)
    if args.expr:
        raise InvalidInput("--expr only applies to --f custom")
    if args.f == functions.NEG_LOG:
        return functions.neg_log()
    if args.alpha is not None and args.beta is not None:
        raise InvalidInput("give either --alpha or --beta, not both")
    if args.alpha is None and args.beta is None:
        raise InvalidInput(f"--f {args.f} needs --alpha or --beta")
    if args.alpha is not None and not args.alpha > 0:
        raise InvalidInput(f"--alpha must be positive, got {args.alpha}")
    return functions.builtin(args.f, beta=args.beta, alpha=args.alpha)


def _load_pair(args):
    X, _ = read_matrix(args.x)
    Y, _ = read_matrix(args.y)
    if X.shape != Y.shape:
        raise InvalidInput(f"--x and --y differ in dimension: {X.shape[0]} vs {Y.shape[0]}")
    return X, Y


def _compute_one(kind, X, Y, alpha, f):
    if kind == "relative-entropy":
        return quantum_relative_entropy(X, Y)
    if kind == "fidelity":
        return fidelity(X, Y)
    if kind == "petz-f":
        return petz_f_divergence(X, Y, f)
    if alpha is None:
        raise InvalidInput(f"--kind {kind} needs --alpha")
    if kind == "petz-renyi":
        return petz_renyi(X, Y, alpha)
    return sandwiched_renyi(X, Y, alpha)


def cmd_compute(args) -> int:
    X, Y = _load_pair(args)
    f = _function(args) if args.kind == "petz-f" else None
    alphas = args.alphas if args.alphas else [args.alpha]
    rows = []
    for a in alphas:
        uses_alpha = args.kind in ("petz-renyi", "sandwiched")
        rows.append({
            "divergence": args.kind if f is None else f"petz-f[{f}]",
            "alpha": a if uses_alpha else None,
            "beta": f.beta if f is not None else None,
            "value": _compute_one(args.kind, X, Y, a, f),
        })
    _emit(_render(rows, args.format), args.out)
    return EXIT_OK


def _config(args):
    return OptimizerConfig(max_iterations=args.max_iterations, convergence_tol=args.tol,
                           gradient_tol=args.tol, restarts=args.restarts,
                           seed=getattr(args, "seed", 0))


def cmd_optimize(args) -> int:
    X, Y = _load_pair(args)
    f = _function(args)
    cfg = _config(args)
    code = EXIT_OK
    try:
        if args.generic:
            report = optimize_tau_generic(X, Y, f, cfg)
        else:
            report = optimized_f_divergence(X, Y, f, cfg)
    except NonConvergence as exc:
        if exc.report is None:
            raise
        log.error("%s", exc)
        report, code = exc.report, EXIT_NONCONVERGENCE
    alpha = f.closed_form.alpha if f.closed_form is not None else None
    if alpha is None and f.beta is not None:
        alpha = functions.sandwiched_alpha(f.beta) if f.beta > -1 else float("inf")
    row = {
        "function": str(f), "alpha": alpha, "beta": f.beta, "value": report.value,
        "label": report.label, "method": report.method, "iterations": report.iterations,
        "residual": report.residual, "gradient_norm": report.gradient_norm,
        "converged": report.converged, "certified": report.certified,
    }
    if args.witness_out:
        write_matrix(args.witness_out, report.witness_tau)
    _emit(_render([row], args.format), args.out)
    return code


def _finish_suite(report, args) -> int:
    text = None
    if args.witness_dir:
        harness.write_witnesses(report, args.witness_dir)
    if args.format == "csv":
        rows = [{k: v for k, v in c.to_json().items() if k not in ("dims", "witness_files")}
                for c in report.checks]
        text = _render(rows, "csv")
    else:
        text = report.dumps()
    _emit(text, args.out)
    for c in report.checks:
        if not c.passed:
            log.error("%s: %d failures, %d inconclusive of %d, worst margin %s",
                      c.name, c.failures, c.inconclusive, c.trials, format_number(c.worst_margin))
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_dpi(args) -> int:
    check = CHECK_ALIASES.get(args.check, args.check)
    if args.f != functions.NEG_LOG:
        _function(args)  # validate the selector before building the spec
    beta = args.beta
    if beta is None and args.alpha is not None and args.f in (functions.NEG_POWER, functions.POWER):
        beta = functions.power_beta(args.alpha)
    spec = harness.TrialSpec(check, args.f, beta, args.dims or (), args.trials, args.seed,
                             args.tolerance, args.expr, args.assert_anti_monotone)
    return _finish_suite(harness.run_suite([spec], _config(args), args.workers), args)


def _load_specs(path, seed, n_trials):
    obj = read_json(path)
    if isinstance(obj, dict):
        obj = obj.get("checks")
    if not isinstance(obj, list) or not obj:
        raise InvalidInput(f"{path}: expected a non-empty list of trial specs")
    specs = []
    for i, item in enumerate(obj):
        if not isinstance(item, dict):
            raise InvalidInput(f"{path}: entry {i} is not an object")
        item = dict({"seed": seed, "n_trials": n_trials}, **item)
        try:
            specs.append(harness.TrialSpec.from_dict(item))
        except TypeError as exc:
            raise InvalidInput(f"{path}: entry {i}: {exc}") from exc
        except InvalidInput as exc:
            raise InvalidInput(f"{path}: entry {i}: {exc}") from exc
    return specs


def cmd_suite(args) -> int:
    if args.spec:
        specs = _load_specs(args.spec, args.seed, args.trials)
    else:
        specs = harness.default_suite(args.seed, args.trials)
    return _finish_suite(harness.run_suite(specs, _config(args), args.workers), args)


def limit_rows(X, Y):
    """Both Renyi families on ``alpha = 1 -/+ 10^-k`` against ``D(Xbar||Y)``."""
    Xbar = X / np.trace(X).real
    D = quantum_relative_entropy(Xbar, Y)
    rows = []
    for sign in (-1.0, 1.0):
        for k in LIMIT_KS:
            a = 1.0 + sign * 10.0 ** -k
            sw, pz = sandwiched_renyi(Xbar, Y, a), petz_renyi(Xbar, Y, a)
            rows.append({"alpha": a, "k": k, "sandwiched": sw, "petz": pz,
                         "relative_entropy": D, "sandwiched_error": abs(sw - D),
                         "petz_error": abs(pz - D)})
    return D, rows


def limit_passed(rows) -> bool:
    ok = True
    for side in (rows[: len(LIMIT_KS)], rows[len(LIMIT_KS):]):
        for key in ("sandwiched_error", "petz_error"):
            errs = [r[key] for r in side]
            slack = [LIMIT_SLACK / abs(r["alpha"] - 1.0) for r in side]
            ok &= all(b <= a + s for a, b, s in zip(errs, errs[1:], slack[1:]))
            ok &= errs[-1] <= LIMIT_TOL
    return bool(ok)


def cmd_limit_check(args) -> int:
    X, Y = _load_pair(args)
    D, rows = limit_rows(X, Y)
    passed = limit_passed(rows)
    extra = {"relative_entropy": D, "passed": passed}
    _emit(_render(rows, args.format, extra), args.out)
    return EXIT_OK if passed else EXIT_FAILED


COMMANDS = {"compute": cmd_compute, "optimize": cmd_optimize, "dpi": cmd_dpi,
            "suite": cmd_suite, "limit-check": cmd_limit_check}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="qfdiv: %(levelname)s: %(message)s",
                        stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InvalidInput as exc:
        print(f"qfdiv: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DomainViolation as exc:
        print(f"qfdiv: domain violation: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NonConvergence, NumericalFailure) as exc:
        print(f"qfdiv: did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        print(f"qfdiv: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
