"""Command-line front end: prove, bench and compare.

Exit codes: 0 proved, 1 failed/cut off/timed out, 2 disproved,
3 usage, parse or file errors.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .engine import PRESETS, TRACE_LEVELS, Config, preset_config, prove, render_trace, trace_jsonl
from .generalize import ALGORITHMS
from .syntax import ParseError, load_theory, parse_term, parse_theory
from .theory import TheoryError

EXIT_PROVED, EXIT_FAILED, EXIT_DISPROVED, EXIT_USAGE = 0, 1, 2, 3
CSV_FIELDS = ("name", "result", "time_ms", "steps", "inductions", "generalizations",
              "overgeneralizations", "failure_reason")
AGGREGATE_TAG = "# success_rate"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    env = os.environ.get("BM_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"BM_SEED must be an integer, got {env!r}") from None


def _theory_names(values: Optional[list]) -> list[str]:
    names = []
    for v in values or ["peano.bmt"]:
        names.extend(x for x in v.split(",") if x)
    return names


def _config(args) -> Config:
    over = dict(seed=_seed(args.seed), timeout=args.timeout)
    if args.gen is not None:
        over["gen_algo"] = args.gen
    if args.max_depth is not None:
        over["max_depth"] = None if args.max_depth < 0 else args.max_depth
    if args.cex_checks is not None:
        over["cex_checks"] = args.cex_checks
    if args.max_steps is not None:
        over["max_steps"] = args.max_steps
    if getattr(args, "trace", None):
        over["trace_level"] = args.trace
    try:
        return preset_config(args.preset, **over)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _load(theories: list[str], extra_rules: Sequence[str] = ()):
    tf = load_theory(*theories)
    th = tf.theory
    for r in extra_rules:
        text = r.strip()
        if not text.endswith(";"):
            text += ";"
        th = parse_theory(f"rewrite {text}", th).theory
    return tf, th


def _status_exit(status: str) -> int:
    if status == "proved":
        return EXIT_PROVED
    if status == "disproved":
        return EXIT_DISPROVED
    return EXIT_FAILED


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theory", action="append", metavar="FILE",
                   help="theory file (repeatable or comma separated; bundled names allowed; default peano.bmt)")
    p.add_argument("--preset", default="BMF", help=f"one of {', '.join(PRESETS)} (default BMF)")
    p.add_argument("--gen", choices=ALGORITHMS, help="override the generalization algorithm")
    p.add_argument("--max-depth", type=int, help="maximum variable depth; negative disables the cutoff")
    p.add_argument("--cex-checks", type=int, help="counterexample checks per generalization (default 5)")
    p.add_argument("--max-steps", type=int, help="proof step budget (default 2000)")
    p.add_argument("--seed", type=int, help="random seed (falls back to $BM_SEED, then 0)")
    p.add_argument("--timeout", type=float, default=120.0, help="wall-clock limit per proof in seconds")
    p.add_argument("--rewrite", action="append", default=[], metavar="RULE",
                   help="extra rewrite rule, e.g. '~ODD(n) <=> EVEN(n)' (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="waterfall", description="Boyer-Moore style waterfall prover for inductive conjectures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pr = sub.add_parser("prove", help="prove one goal and print its trace")
    _common(pr)
    pr.add_argument("--goal", required=True, help='goal term, e.g. "m + n = n + m"')
    pr.add_argument("--trace", choices=TRACE_LEVELS, default="normal")
    pr.add_argument("--jsonl", metavar="FILE", help="also write the trace as JSON lines")

    b = sub.add_parser("bench", help="run a conjecture suite and write a CSV")
    _common(b)
    b.add_argument("--suite", required=True, action="append", metavar="FILE")
    b.add_argument("--out", default="-", help="CSV path (default stdout)")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--no-time", action="store_true", help="write 0 for time_ms so runs compare byte for byte")

    c = sub.add_parser("compare", help="diff the results of two or more bench CSVs")
    c.add_argument("csvs", nargs="+", metavar="CSV")
    c.add_argument("--all", action="store_true", help="list every conjecture, not only the differing ones")
    return p


# --------------------------------------------------------------------------
# prove

def cmd_prove(args, out=sys.stdout) -> int:
    cfg = _config(args)
    _, th = _load(_theory_names(args.theory), args.rewrite)
    goal = parse_term(args.goal, th)
    o = prove(goal, th, cfg)
    text = render_trace(o.trace, cfg.trace_level)
    if text:
        out.write(text if text.endswith("\n") else text + "\n")
    if args.jsonl:
        with open(args.jsonl, "w", encoding="utf-8") as fh:
            fh.write(trace_jsonl(o.trace))
    m = o.metrics
    if cfg.trace_level != "silent":
        out.write(f"result: {o.status}  steps={m.steps} inductions={m.inductions} "
                  f"generalizations={m.generalizations} overgeneralizations={m.overgeneralizations} "
                  f"time={m.wall_time * 1000:.0f}ms\n")
    return _status_exit(o.status)


# --------------------------------------------------------------------------
# bench

@dataclass(frozen=True)
class BenchTask:
    theories: tuple
    suites: tuple
    rules: tuple
    cfg: Config


_worker_state: dict = {}


def _load_suite(task: BenchTask):
    tf, th = _load(list(task.theories), task.rules)
    suite = load_theory(*task.suites, base=th)
    return suite.theory, suite.conjectures


def _worker_init(task: BenchTask) -> None:
    _worker_state["task"] = task
    _worker_state["loaded"] = _load_suite(task)


def _run_one(index: int) -> dict:
    task = _worker_state["task"]
    th, conjs = _worker_state["loaded"]
    return _row(conjs[index].name, prove(conjs[index].term, th, task.cfg))


def _row(name: str, o) -> dict:
    m = o.metrics
    return dict(name=name, result=o.status, time_ms=int(round(m.wall_time * 1000)), steps=m.steps,
                inductions=m.inductions, generalizations=m.generalizations,
                overgeneralizations=m.overgeneralizations,
                failure_reason="" if o.proved else " ".join(o.reason.split()))


def run_bench(task: BenchTask, jobs: int = 1) -> list[dict]:
    """Prove every conjecture of the suite; rows come back in suite order."""
    th, conjs = _load_suite(task)
    names = [c.name for c in conjs]
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise UsageError(f"duplicate conjecture names: {', '.join(dup)}")
    if jobs <= 1 or len(conjs) <= 1:
        return [_row(c.name, prove(c.term, th, task.cfg)) for c in conjs]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_worker_init, initargs=(task,)) as ex:
        return list(ex.map(_run_one, range(len(conjs))))


def write_csv(rows: list[dict], fh, with_time: bool = True) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r if with_time else {**r, "time_ms": 0})
    if rows:
        proved = sum(r["result"] == "proved" for r in rows)
        fh.write(f"{AGGREGATE_TAG},{proved}/{len(rows)},{100.0 * proved / len(rows):.1f}%\n")


def read_csv(path: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [l for l in fh if not l.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_FIELDS:
        raise UsageError(f"{path}: not a bench CSV (expected columns {','.join(CSV_FIELDS)})")
    return list(reader)


def cmd_bench(args, out=sys.stdout) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    task = BenchTask(tuple(_theory_names(args.theory)), tuple(_theory_names(args.suite)),
                     tuple(args.rewrite), _config(args).with_(trace_level="silent"))
    rows = run_bench(task, args.jobs)
    if args.out == "-":
        write_csv(rows, out, not args.no_time)
    else:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_csv(rows, fh, not args.no_time)
        proved = sum(r["result"] == "proved" for r in rows)
        if rows:
            out.write(f"{proved}/{len(rows)} proved ({100.0 * proved / len(rows):.1f}%), written to {args.out}\n")
        else:
            out.write(f"empty suite, header written to {args.out}\n")
    return 0


# --------------------------------------------------------------------------
# compare

def compare_tables(tables: list[list[dict]], labels: list[str], show_all: bool = False) -> str:
    status = [{r["name"]: r["result"] for r in rows} for rows in tables]
    order = list(dict.fromkeys(r["name"] for rows in tables for r in rows))
    lines = []
    for lab, d in zip(labels, status):
        proved = sum(v == "proved" for v in d.values())
        lines.append(f"{lab}: {proved}/{len(d)} proved")
    rows = []
    for name in order:
        vals = [d.get(name, "-") for d in status]
        differs = len(set(vals)) > 1
        if differs or show_all:
            rows.append(("*" if differs else " ", name, vals))
    if rows:
        width = max(len(r[1]) for r in rows)
        cols = [max(len(lab), *(len(r[2][i]) for r in rows)) for i, lab in enumerate(labels)]
        lines.append("")
        lines.append(("  " + "name".ljust(width) + "  " + "  ".join(l.ljust(w) for l, w in zip(labels, cols))).rstrip())
        for mark, name, vals in rows:
            lines.append((f"{mark} {name.ljust(width)}  " + "  ".join(v.ljust(w) for v, w in zip(vals, cols))).rstrip())
    n = sum(r[0] == "*" for r in rows)
    lines.append("")
    lines.append(f"{n} conjecture{'s' if n != 1 else ''} differ")
    return "\n".join(lines) + "\n"


def cmd_compare(args, out=sys.stdout) -> int:
    if len(args.csvs) < 2:
        raise UsageError("compare needs at least two CSV files")
    tables = [read_csv(p) for p in args.csvs]
    labels = [os.path.splitext(os.path.basename(p))[0] for p in args.csvs]
    out.write(compare_tables(tables, labels, args.all))
    return 0


COMMANDS = {"prove": cmd_prove, "bench": cmd_bench, "compare": cmd_compare}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
    except (TheoryError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
