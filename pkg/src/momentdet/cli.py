"""Command-line front end: ``momentdet {analyze,trace,measure,convert}``.

Exit codes: 0 for a Determinate/Indeterminate verdict (and for every other
successful command), 2 for Inconclusive, 10 for invalid input and 11 for
numerical failures.  JSON payloads carry ``"schema": 1``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ComputeError, InvalidInput, InvalidParameter, NotIndeterminateWarning
from .jacobi import JacobiSequence, MomentSequence, jacobi_from_moments, moments_from_jacobi
from .recurrence import run_trace
from .sc import Verdict, decide_sc
from .spectral import TridiagonalTruncation, extremal_measure_pair, quadrature_measure

SCHEMA = 1
EXIT_OK = 0
EXIT_INCONCLUSIVE = 2
EXIT_INVALID = 10
EXIT_COMPUTE = 11
MAX_MEASURE_LEVEL = 2000

FAMILY_CHOICES = ("qgauss-pos", "qgauss-neg", "power", "constant")


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors map to exit 10."""

    def error(self, message):
        raise InvalidParameter(message)


def _number(text: str):
    """Accept ints, floats and ``p/q`` fractions on the command line."""
    try:
        if "/" in text:
            return Fraction(text)
        val = float(text)
        return int(text) if text.lstrip("+-").isdigit() else val
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _add_source(p):
    src = p.add_argument_group("sequence source")
    src.add_argument("--family", choices=FAMILY_CHOICES)
    src.add_argument("--q", type=_number)
    src.add_argument("--p", type=_number)
    src.add_argument("--c", type=_number)
    src.add_argument("--file", type=Path, help="JSON sequence spec or plain list of omega values")


def _add_common(p, fmt_default="json"):
    p.add_argument("--max-terms", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--mode", choices=("float", "exact"), default="float")
    p.add_argument("--format", choices=("json", "csv"), default=fmt_default)
    p.add_argument("--out", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="momentdet",
                     description="Determinacy analysis of symmetric moment problems "
                                 "from their Jacobi sequences.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="decide (in)determinacy with a certificate")
    _add_source(p)
    _add_common(p)

    p = sub.add_parser("trace", help="recurrence trace as CSV")
    _add_source(p)
    _add_common(p, fmt_default="csv")
    p.add_argument("--m", type=int, help="trace length (defaults to --max-terms)")

    p = sub.add_parser("measure", help="quadrature measure of a truncation")
    _add_source(p)
    _add_common(p)
    p.add_argument("--m", type=int, help="truncation level; omit for the even/odd pair")
    p.add_argument("--parity", choices=("even", "odd"))

    p = sub.add_parser("convert", help="moments <-> Jacobi sequence")
    _add_source(p)
    _add_common(p)
    p.add_argument("--moments", help="JSON list of even moments M_0, M_2, ... (or @file)")
    p.add_argument("--n-moments", type=int, help="number N of even moments beyond M_0")
    return parser


# -- config checks ------------------------------------------------------------

def _load_json_arg(text: str):
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"malformed JSON: {exc}") from exc


def sequence_from_args(args) -> JacobiSequence:
    """Exactly one of ``--family`` and ``--file``."""
    if (args.family is None) == (args.file is None):
        raise InvalidParameter("give exactly one of --family or --file")
    if args.file is not None:
        try:
            data = json.loads(args.file.read_text())
        except OSError as exc:
            raise InvalidParameter(f"cannot read {args.file}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidParameter(f"malformed JSON in {args.file}: {exc}") from exc
        if isinstance(data, list):
            data = {"family": "explicit", "omega": data}
        return JacobiSequence.from_json(data)
    need = {"qgauss-pos": "q", "qgauss-neg": "q", "power": "p", "constant": None}[args.family]
    if need and getattr(args, need) is None:
        raise InvalidParameter(f"--family {args.family} needs --{need}")
    if args.family == "qgauss-pos":
        return JacobiSequence.qgauss_pos(args.q)
    if args.family == "qgauss-neg":
        return JacobiSequence.qgauss_neg(args.q)
    if args.family == "power":
        return JacobiSequence.power(args.p)
    return JacobiSequence.constant(args.c if args.c is not None else 1)


def _check_common(args):
    if args.max_terms < 4:
        raise InvalidParameter("--max-terms must be >= 4")
    if not 0 < args.tol < 1:
        raise InvalidParameter("--tol must lie in (0, 1)")


# -- output -------------------------------------------------------------------

def _json_default(obj):
    if isinstance(obj, Fraction):
        return obj.numerator if obj.denominator == 1 else f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(text: str, out: Path | None, stdout):
    if out is None:
        stdout.write(text)
    else:
        out.write_text(text)


def _emit_json(payload: dict, args, stdout):
    body = {"schema": SCHEMA}
    body.update(payload)
    _emit(json.dumps(body, indent=2, default=_json_default) + "\n", args.out, stdout)


def _csv_rows(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# -- commands -----------------------------------------------------------------

def cmd_analyze(args, stdout, stderr) -> int:
    seq = sequence_from_args(args)
    report = decide_sc(seq, args.max_terms, args.tol)
    payload = report.to_json()
    payload["sequence"] = seq.label()
    if args.format == "json":
        _emit_json(payload, args, stdout)
    else:
        cert = payload.pop("certificate")
        payload["certificate"] = cert["kind"]
        _emit(_csv_rows(payload.keys(), [payload.values()]), args.out, stdout)
    return EXIT_INCONCLUSIVE if report.verdict is Verdict.INCONCLUSIVE else EXIT_OK


def log_fit(sum_c, lo: int, hi: int):
    """Least-squares ``sumC_m ~ a ln m + b`` over ``lo <= m <= hi``."""
    m = np.arange(lo, hi + 1, dtype=float)
    a, b = np.polyfit(np.log(m), np.asarray([float(x) for x in sum_c[lo:hi + 1]]), 1)
    return float(a), float(b)


def cmd_trace(args, stdout, stderr) -> int:
    seq = sequence_from_args(args)
    m = args.m if args.m is not None else args.max_terms
    if m < 1:
        raise InvalidParameter("--m must be >= 1")
    if seq.length is not None and m > seq.length:
        m = seq.length
    if args.mode == "float":
        m = seq.available_terms(m)
    trace = run_trace(seq, m, args.mode)
    fit = None
    if m >= 8:
        a, b = log_fit(trace.sum_c, max(2, m // 2), m)
        fit = {"a": a, "b": b, "range": [max(2, m // 2), m]}
    if args.format == "csv":
        _emit(trace.to_csv(), args.out, stdout)
        if fit is not None:
            stderr.write(f"# sumC_m ~ a*ln(m) + b on m in [{fit['range'][0]}, {m}]: "
                         f"a={fit['a']:.6g} b={fit['b']:.6g}\n")
    else:
        from .recurrence import CSV_COLUMNS, _fmt
        rows = [[_fmt(x) for x in row] for row in trace.rows()]
        _emit_json({"sequence": seq.label(), "mode": args.mode, "columns": list(CSV_COLUMNS),
                    "rows": rows, "sumC_log_fit": fit}, args, stdout)
    return EXIT_OK


def cmd_measure(args, stdout, stderr) -> int:
    seq = sequence_from_args(args)
    if args.m is None:
        if args.max_terms > MAX_MEASURE_LEVEL:
            args.max_terms = MAX_MEASURE_LEVEL
        m_max = seq.available_terms(args.max_terms)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NotIndeterminateWarning)
            pair = extremal_measure_pair(seq, m_max, args.tol)
        for w in caught:
            stderr.write(f"warning: {w.message}\n")
        measures = [pair.mu_even, pair.mu_odd]
        if args.parity is not None:
            measures = [pair.mu_even if args.parity == "even" else pair.mu_odd]
        payload = {"sequence": seq.label(),
                   "measures": [mu.to_json() for mu in measures],
                   "stieltjes_gap": pair.stieltjes_gap,
                   "gap_lower": pair.gap.gap_lower, "gap_upper": pair.gap.gap_upper}
    else:
        m = args.m
        if not 1 <= m <= MAX_MEASURE_LEVEL:
            raise InvalidParameter(f"--m must lie in [1, {MAX_MEASURE_LEVEL}]")
        if args.parity is not None and args.parity != ("odd" if m % 2 else "even"):
            raise InvalidParameter(f"--m {m} does not have parity {args.parity}")
        measures = [quadrature_measure(TridiagonalTruncation.from_sequence(seq, m))]
        payload = {"sequence": seq.label(), "measures": [mu.to_json() for mu in measures]}
    if args.format == "json":
        _emit_json(payload, args, stdout)
    else:
        rows = []
        for mu in measures:
            d = mu.to_json()
            rows += [(d["level"], d["parity"], repr(x), repr(w))
                     for x, w in zip(d["atoms"], d["weights"])]
        _emit(_csv_rows(("level", "parity", "atom", "weight"), rows), args.out, stdout)
    return EXIT_OK


def cmd_convert(args, stdout, stderr) -> int:
    mode = None if args.mode == "float" and args.moments is not None else args.mode
    if args.moments is not None:
        if args.family is not None or args.file is not None:
            raise InvalidParameter("--moments cannot be combined with a sequence source")
        data = _load_json_arg(args.moments)
        moments = MomentSequence.from_json(data)
        if args.mode == "exact":
            from .jacobi import to_fraction
            moments = MomentSequence(tuple(to_fraction(v) for v in moments.even_moments))
        omega = jacobi_from_moments(moments, mode)
        payload = {"omega": list(omega)}
        header = ("n", "omega_n")
    else:
        if args.n_moments is None:
            raise InvalidParameter("convert needs --moments or a sequence with --n-moments")
        if args.n_moments < 0:
            raise InvalidParameter("--n-moments must be >= 0")
        seq = sequence_from_args(args)
        ms = moments_from_jacobi(seq, args.n_moments, args.mode)
        if args.mode == "float" and not all(math.isfinite(v) for v in ms.even_moments):
            raise ComputeError("moments overflow double precision; use --mode exact")
        payload = {"sequence": seq.label(), "even_moments": list(ms.even_moments)}
        header = ("n", "M_2n")
    if args.format == "json":
        _emit_json(payload, args, stdout)
    else:
        vals = payload["omega"] if "omega" in payload else payload["even_moments"]
        start = 1 if "omega" in payload else 0
        rows = [(i, _json_default(v) if isinstance(v, Fraction) else repr(v))
                for i, v in enumerate(vals, start=start)]
        _emit(_csv_rows(header, rows), args.out, stdout)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "trace": cmd_trace,
            "measure": cmd_measure, "convert": cmd_convert}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        _check_common(args)
        return COMMANDS[args.command](args, stdout, stderr)
    except InvalidInput as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID
    except ComputeError as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_COMPUTE
    except (OverflowError, FloatingPointError, ZeroDivisionError) as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
