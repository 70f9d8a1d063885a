"""Command-line entry point.

Machine-readable output goes to stdout; diagnostics go to stderr.

Exit codes for ``diagnose``: 0 diagnosis found, 1 invalid input,
2 no diagnosis exists, 3 no reconfiguration needed, 4 time budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys

from .bench import SuiteConfig, run_suite
from .diagnosis import GranularityError, Status, estimate_checks
from .engine import BudgetExceeded, CheckSession
from .expr import ExpressionError
from .featuremodel import (FeatureModelError, GenerationParams, NoAlternativeSolution, generate_random_fm,
                           generate_reconfig_requirements, parse_sxfm, reconfiguration_task,
                           sample_configuration, write_sxfm)
from .reconfig import NoDiagnosis, diagnose, enumerate_diagnoses, reconfigure, validate_task
from .task import TaskError, dump_task, load_task_file

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NONE = 2
EXIT_NOT_NEEDED = 3
EXIT_BUDGET = 4

_STATUS_EXIT = {Status.FOUND: EXIT_OK, Status.NONE_EXISTS: EXIT_NONE, Status.NOT_NEEDED: EXIT_NOT_NEEDED}


def _err(msg):
    print(msg, file=sys.stderr)


def _emit(obj):
    print(json.dumps(obj, indent=2))


def _session(args):
    budget = getattr(args, "budget_ms", None)
    return CheckSession(time_budget=None if budget is None else budget / 1000.0)


def _read_ordering(path):
    with open(path) as fh:
        text = fh.read()
    try:
        ids = json.loads(text)
    except json.JSONDecodeError:
        ids = text.split()
    if not isinstance(ids, list):
        raise TaskError("ordering file must hold a JSON array or whitespace-separated ids")
    return [str(x) for x in ids]


def _load(args):
    task = load_task_file(args.task)
    ordering = getattr(args, "ordering", "default")
    if ordering and ordering != "default":
        task = task.with_ordering(_read_ordering(ordering))
    return task


def cmd_diagnose(args):
    task = _load(args)
    report = validate_task(task)
    for line in report.lines():
        _err(line)
    if not report.ok:
        if not report.requirements_consistent and report.kb_consistent:
            _emit({"status": Status.NONE_EXISTS.value, "delta": [], "m": args.m, "checks": 0,
                   "guard_checks": 0, "elapsed_ms": 0.0, "bound": None})
            return EXIT_NONE
        _err("invalid task: knowledge base inconsistent")
        return EXIT_INVALID
    d = diagnose(task, args.m, _session(args), precheck=True)
    _emit(d.report(len(task.solution)))
    return _STATUS_EXIT[d.status]


def cmd_reconfigure(args):
    task = _load(args)
    if task.model.is_consistent([c.id for c in task.constraints]):
        _err("existing configuration already satisfies the new requirements")
        return EXIT_NOT_NEEDED
    try:
        rec = reconfigure(task, args.m, _session(args))
    except NoDiagnosis as exc:
        _err(str(exc))
        return EXIT_NONE
    _emit(rec.report())
    return EXIT_OK


def cmd_enumerate(args):
    task = _load(args)
    try:
        found = enumerate_diagnoses(task, args.m, args.k, _session(args))
    except NoDiagnosis as exc:
        _err(str(exc))
        return EXIT_NONE
    _emit({"m": args.m, "diagnoses": [list(d.elements) for d in found],
           "checks": [d.checks + d.guard_checks for d in found]})
    return EXIT_OK if found else EXIT_NOT_NEEDED


def cmd_estimate(args):
    try:
        print(estimate_checks(args.n, args.delta, args.m))
    except GranularityError:
        print("n/a")
        return EXIT_NONE
    return EXIT_OK


def cmd_bench(args):
    cfg = SuiteConfig.load(args.suite)
    if args.workers:
        cfg.workers = args.workers
    result = run_suite(cfg)
    text = result.to_csv(include_timing=not args.no_timing)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failed = sum(1 for r in result.rows if r.error)
    if failed:
        _err(f"{failed} row(s) recorded an error")
    return EXIT_OK


def cmd_gen_fm(args):
    params = GenerationParams(num_features=args.features, ctc_fraction=args.ctc,
                              max_children=args.max_children, seed=args.seed)
    text = write_sxfm(generate_random_fm(params))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_convert(args):
    with open(args.sxfm, "rb") as fh:
        fm = parse_sxfm(fh.read())
    S = sample_configuration(fm, args.seed)
    try:
        reqs = generate_reconfig_requirements(fm, S, args.fraction, args.seed + 1)
    except NoAlternativeSolution as exc:
        _err(str(exc))
        return EXIT_NONE
    text = dump_task(reconfiguration_task(fm, S, reqs))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors share the invalid-input exit code; 2 means "no diagnosis"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="flexdiag", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def positive(text):
        v = int(text)
        if v < 1:
            raise argparse.ArgumentTypeError("must be >= 1")
        return v

    d = sub.add_parser("diagnose", help="compute one diagnosis")
    d.add_argument("task")
    d.add_argument("--m", type=positive, default=1)
    d.add_argument("--budget-ms", type=float, default=None)
    d.add_argument("--ordering", default="default", help="file with solution ids, lowest importance first")
    d.set_defaults(func=cmd_diagnose)

    r = sub.add_parser("reconfigure", help="diagnose and compute a repaired configuration")
    r.add_argument("task")
    r.add_argument("--m", type=positive, default=1)
    r.add_argument("--budget-ms", type=float, default=None)
    r.add_argument("--ordering", default="default")
    r.set_defaults(func=cmd_reconfigure)

    e = sub.add_parser("enumerate", help="enumerate diagnoses breadth-first")
    e.add_argument("task")
    e.add_argument("--m", type=positive, default=1)
    e.add_argument("--k", type=positive, default=None)
    e.add_argument("--budget-ms", type=float, default=None)
    e.add_argument("--ordering", default="default")
    e.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("estimate", help="worst-case consistency checks")
    s.add_argument("--n", type=positive, required=True)
    s.add_argument("--delta", type=positive, required=True)
    s.add_argument("--m", type=positive, default=1)
    s.set_defaults(func=cmd_estimate)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("suite")
    b.add_argument("--out")
    b.add_argument("--workers", type=positive, default=None)
    b.add_argument("--no-timing", action="store_true", help="drop elapsed columns")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen-fm", help="generate a random feature model (SXFM)")
    g.add_argument("--features", type=int, required=True)
    g.add_argument("--ctc", type=float, default=0.1)
    g.add_argument("--max-children", type=positive, default=4)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen_fm)

    c = sub.add_parser("convert", help="SXFM model to a reconfiguration task document")
    c.add_argument("sxfm")
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--fraction", type=float, required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_convert)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        _err(f"budget exceeded: {exc}")
        return EXIT_BUDGET
    except (TaskError, ExpressionError, FeatureModelError, ValueError, OSError) as exc:
        _err(f"error: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
