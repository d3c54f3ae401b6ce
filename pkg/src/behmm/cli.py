"""Command line interface.

Exit codes:
  0  success
  2  malformed input file
  3  validation failure (bad model, non-CP/non-unital channel, failed check)
  4  explicit-sum budget exceeded
  5  degenerate or undefined recurrence quantity
  6  internal error
"""
import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io
from .classical import diagonal_restriction_check
from .entangled import channel_from_pair_map, validate_channel
from .errors import BehmmError, ParseError
from .joint import hidden_expectation, joint_expectation_bi, joint_expectation_oracle
from .matrix import as_projection
from .recurrence import complete_accessibility, e_recurrence_check, phi_recurrence_report

ORACLE_RTOL = 1e-10
COMMANDS = ("validate", "joint", "hidden", "recurrence", "diagonal")


def _map(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _validate(model, query, jobs):
    results = []
    for which in ("H", "HO", "O_underlying"):
        rep = validate_channel(channel_from_pair_map(model, which))
        results.append({
            "channel": which,
            "cp": rep.cp,
            "unital": rep.unital,
            "min_choi_eigenvalue": rep.min_choi_eigenvalue,
            "unitality_defect": rep.unitality_defect,
        })
    return results, all(r["cp"] and r["unital"] for r in results)


def _joint(model, query, jobs):
    def one(word):
        value = joint_expectation_bi(model, word)
        row = {"length": len(word), "value": value}
        if query.oracle:
            oracle = joint_expectation_oracle(model, word)
            diff = abs(value - oracle)
            row.update(oracle=oracle, difference=diff, agree=bool(diff <= ORACLE_RTOL * (1 + abs(value))))
        return row

    results = _map(one, query.words, jobs)
    return results, all(r.get("agree", True) for r in results)


def _hidden(model, query, jobs):
    ch = channel_from_pair_map(model, query.channel)

    def one(word):
        return {"length": len(word), "channel": query.channel, "value": hidden_expectation(model.W0, ch, word)}

    return _map(one, query.words, jobs), True


def _diagonal(model, query, jobs):
    ch = channel_from_pair_map(model, "O_underlying")

    def one(word):
        r = diagonal_restriction_check(model, word, ch)
        return {"word": word, "quantum": r.quantum, "classical": r.classical, "defect": r.defect,
                "agree": bool(r.defect <= query.tol)}

    results = _map(one, query.words, jobs)
    return results, all(r["agree"] for r in results)


def _recurrence(model, query, jobs):
    ch = channel_from_pair_map(model, "O_underlying")
    N = query.horizon

    def one(item):
        idx, e = item
        e = as_projection(e, model.d, f"projections[{idx}]")
        rep = phi_recurrence_report(model, e, N)
        erec = e_recurrence_check(ch, e, N, query.tol)
        acc = complete_accessibility(ch, e, N, query.tol)
        return {
            "projection": idx,
            "q": rep.q,
            "q_threshold": rep.q_threshold,
            "bound_certified": rep.bound_certified,
            "bound_holds": rep.bound_holds,
            "verdict": rep.verdict,
            "phi_e": rep.phi_e,
            "phi_normalized_sum": rep.phi_normalized_sum,
            "tail_bound": rep.tail_bound,
            "partition_defect": rep.partition_defect,
            "residual_sequence": rep.residual_sequence,
            "e_recurrence": {"lhs": erec.lhs, "satisfied": erec.satisfied, "residual": erec.residual},
            "complete_accessibility": {"accessible": acc.accessible, "residual_norms": acc.residual_norms},
        }

    return _map(one, list(enumerate(query.projections)), jobs), True


HANDLERS = {
    "validate": _validate,
    "joint": _joint,
    "hidden": _hidden,
    "recurrence": _recurrence,
    "diagonal": _diagonal,
}


def run_query(model, query, jobs=1):
    """Dispatch a parsed query; returns ``(report, ok)``."""
    results, ok = HANDLERS[query.kind](model, query, jobs)
    report = {
        "command": query.kind,
        "d": model.d,
        "settings": {"horizon": query.horizon, "tol": query.tol, "oracle": query.oracle},
        "ok": ok,
        "results": results,
    }
    return report, ok


def _fmt(v):
    if isinstance(v, bool) or v is None:
        return str(v).lower() if v is not None else "-"
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.12g}{v.imag:+.3g}j"
    if isinstance(v, (float, np.floating)):
        return f"{v:.12g}"
    if isinstance(v, list):
        if len(v) > 4:
            return f"[{_fmt(v[0])}, ..., {_fmt(v[-1])}] ({len(v)})"
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, dict):
        return " ".join(f"{k}={_fmt(x)}" for k, x in v.items())
    return str(v)


def render_table(report):
    lines = [f"{report['command']}  d={report['d']}  ok={_fmt(report['ok'])}"]
    for i, row in enumerate(report["results"]):
        lines.append(f"[{i}]")
        width = max(len(k) for k in row)
        for k, v in row.items():
            lines.append(f"  {k.ljust(width)}  {_fmt(v)}")
    return "\n".join(lines) + "\n"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="behmm",
        description="Bi-entangled hidden quantum Markov model engine.",
        epilog="exit codes: 0 ok, 2 parse error, 3 validation failure, 4 budget exceeded, "
        "5 degenerate/undefined recurrence, 6 internal error",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=f"run a {name} query")
        cmd.add_argument("--model", required=True, help="model JSON file")
        cmd.add_argument("--query", help="query JSON file (not needed for validate)")
        cmd.add_argument("--oracle", action="store_true", default=None, help="also evaluate the explicit-sum oracle")
        cmd.add_argument("--horizon", type=int, help=f"truncation horizon N (default {io.DEFAULT_HORIZON})")
        cmd.add_argument("--tol", type=float, help=f"tolerance (default {io.DEFAULT_TOL})")
        cmd.add_argument("--format", choices=("table", "structured"), default="table")
        cmd.add_argument("--jobs", type=int, default=1, help="evaluate independent items in parallel")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        model = io.load_model(args.model)
        if args.query:
            query = io.query_from_dict(io.read_json(args.query), model.d, args.command)
        elif args.command == "validate":
            query = io.Query("validate", [], [])
        else:
            raise ParseError(f"{args.command}: --query is required")
        if args.oracle:
            query.oracle = True
        if args.horizon is not None:
            if args.horizon < 1:
                raise ParseError(f"--horizon: expected a positive integer, got {args.horizon}")
            query.horizon = args.horizon
        if args.tol is not None:
            query.tol = args.tol
        report, ok = run_query(model, query, max(1, args.jobs))
    except BehmmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 6
    out = io.dumps(report) if args.format == "structured" else render_table(report)
    sys.stdout.write(out)
    return 0 if ok else 3


if __name__ == "__main__":
    sys.exit(main())
