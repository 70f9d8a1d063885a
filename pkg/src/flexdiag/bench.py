"""Benchmark harness: scenarios, seeded suites, CSV output and the
evolutionary comparison.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from .diagnosis import Status
from .engine import CheckSession, ConstraintModel
from .evolution import EvolutionParams, evolutionary_diagnose
from .expr import Compare, Const, Logic, Var, conjoin, truth
from .featuremodel import (GenerationFailed, GenerationParams, fm_to_csp, generate_random_fm,
                           generate_reconfig_requirements, parse_sxfm, reconfiguration_task,
                           sample_configuration)
from .metrics import accuracy, aggregate, minimality
from .reconfig import diagnose
from .task import AssignmentConstraint, ConstraintExpr, Domain, ReconfigurationTask, Variable, load_task_file

log = logging.getLogger(__name__)

RESULT_COLUMNS = ("model_id", "num_vars", "num_constraints", "m", "fraction", "reorder_index",
                  "repeat_index", "delta_size", "checks", "elapsed_ms", "minimality", "accuracy",
                  "seed", "error")
AGGREGATE_COLUMNS = ("group_vars", "m", "mean_delta_size", "mean_checks", "mean_time_ms",
                     "mean_minimality", "mean_accuracy", "n")
TIMING_COLUMNS = ("elapsed_ms", "mean_time_ms")


@dataclass
class ScenarioResult:
    model_id: str
    num_vars: int
    num_constraints: int
    m: int
    fraction: float | None
    reorder_index: int
    repeat_index: int
    delta_size: int
    checks: int
    elapsed_ms: float
    minimality: float
    accuracy: float
    seed: int
    error: str = ""

    def row(self):
        return [_fmt(getattr(self, c)) for c in RESULT_COLUMNS]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def derive_seed(*parts) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def run_scenario(task, m: int, repeats: int = 3, session_factory=CheckSession, model_id="task",
                 fraction=None, reorder_index=1, seed=0, delta_min=None) -> list:
    """Run FlexDiag ``repeats`` times at granularity ``m`` on one ordered task.

    ``delta_min`` (the m=1 result for the same ordering) is computed once
    when not supplied.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if delta_min is None:
        delta_min = diagnose(task, 1, session_factory())
    rows = []
    base = dict(model_id=model_id, num_vars=len(task.variables), num_constraints=len(task.kb), m=m,
                fraction=fraction, reorder_index=reorder_index, seed=seed)
    for rep in range(1, repeats + 1):
        session = session_factory()
        d = diagnose(task, m, session)
        if d.status is not Status.FOUND or delta_min.status is not Status.FOUND:
            status = d.status if d.status is not Status.FOUND else delta_min.status
            rows.append(ScenarioResult(**base, repeat_index=rep, delta_size=len(d), checks=session.counter,
                                       elapsed_ms=d.elapsed * 1000.0, minimality=float("nan"),
                                       accuracy=float("nan"), error=status.value))
            continue
        rows.append(ScenarioResult(**base, repeat_index=rep, delta_size=len(d), checks=session.counter,
                                   elapsed_ms=d.elapsed * 1000.0,
                                   minimality=minimality(d.ids, delta_min.ids),
                                   accuracy=accuracy(d.ids, delta_min.ids)))
    return rows


# --- suites ----------------------------------------------------------------------

@dataclass
class SuiteConfig:
    models: list
    m: list
    fractions: list
    reorderings: int = 10
    repeats: int = 3
    seed: int = 0
    reorder: str = "solution"  # or "requirements"
    workers: int = 1

    @classmethod
    def from_dict(cls, doc, base_dir="."):
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown suite keys: {sorted(unknown)}")
        cfg = cls(**doc)
        cfg.base_dir = base_dir
        if cfg.reorder not in ("solution", "requirements"):
            raise ValueError("reorder must be 'solution' or 'requirements'")
        return cfg

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh), os.path.dirname(os.path.abspath(path)))


@dataclass
class SuiteResult:
    rows: list
    summary: list

    def results_csv(self, include_timing=True) -> str:
        return _csv(RESULT_COLUMNS, [r.row() for r in self.rows], include_timing)

    def aggregate_csv(self, include_timing=True) -> str:
        body = [[_fmt(s.get(c)) for c in AGGREGATE_COLUMNS] for s in self.summary]
        return _csv(AGGREGATE_COLUMNS, body, include_timing)

    def to_csv(self, include_timing=True) -> str:
        return self.results_csv(include_timing) + "\n" + self.aggregate_csv(include_timing)


def _csv(header, rows, include_timing):
    keep = [i for i, c in enumerate(header) if include_timing or c not in TIMING_COLUMNS]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([header[i] for i in keep])
    for r in rows:
        w.writerow([r[i] for i in keep])
    return buf.getvalue()


def _model_sources(cfg):
    """Yield (model_id, kind, payload, seed) per configured model."""
    for i, spec in enumerate(cfg.models):
        seed = spec.get("seed", derive_seed(cfg.seed, 1, i))
        if "generate" in spec:
            params = dict(spec["generate"])
            params.setdefault("seed", seed)
            try:
                fm = generate_random_fm(GenerationParams(**params))
            except GenerationFailed as exc:
                yield spec.get("id", f"model{i}"), "failed", (exc, params["num_features"]), seed
                continue
            yield spec.get("id", fm.name), "fm", fm, seed
        elif "sxfm" in spec:
            path = os.path.join(getattr(cfg, "base_dir", "."), spec["sxfm"])
            with open(path, "rb") as fh:
                fm = parse_sxfm(fh.read())
            yield spec.get("id", fm.name), "fm", fm, seed
        elif "task" in spec:
            path = os.path.join(getattr(cfg, "base_dir", "."), spec["task"])
            yield spec.get("id", os.path.basename(path)), "task", load_task_file(path), seed
        else:
            raise ValueError(f"model entry {i} needs 'generate', 'sxfm' or 'task'")


def _units(cfg):
    """Yield (model_id, task or exception, shape, fraction, reorder index, seed)."""
    for model_id, kind, payload, seed in _model_sources(cfg):
        if kind == "fm":
            shape = (len(payload.features), len(fm_to_csp(payload).kb))
            try:
                S = sample_configuration(payload, derive_seed(seed, 2))
            except Exception as exc:
                S, failure = None, exc
            for fi, fraction in enumerate(cfg.fractions):
                if S is not None:
                    try:
                        reqs = generate_reconfig_requirements(payload, S, fraction, derive_seed(seed, 3, fi))
                        task = reconfiguration_task(payload, S, reqs)
                    except Exception as exc:
                        task = exc
                else:
                    task = failure
                for r in range(1, cfg.reorderings + 1):
                    yield model_id, task, shape, fraction, r, derive_seed(seed, 4, fi, r)
        elif kind == "failed":
            exc, num_features = payload
            for fi, fraction in enumerate(cfg.fractions):
                for r in range(1, cfg.reorderings + 1):
                    yield model_id, exc, (num_features, 0), fraction, r, derive_seed(seed, 4, fi, r)
        else:
            shape = (len(payload.variables), len(payload.kb))
            for r in range(1, cfg.reorderings + 1):
                yield model_id, payload, shape, None, r, derive_seed(seed, 4, 0, r)


def _reordered(task, seed, mode):
    rng = np.random.default_rng(seed)
    if mode == "solution":
        perm = rng.permutation(len(task.ordering))
        out = task.with_ordering([task.ordering[i] for i in perm])
    else:
        perm = rng.permutation(len(task.requirements))
        out = ReconfigurationTask(task.variables, task.kb, task.solution,
                                  [task.requirements[i] for i in perm], task.ordering)
        out.__dict__["model"] = task.model
    return out


def _run_unit(cfg, unit):
    model_id, task, shape, fraction, r, seed = unit
    rows = []
    try:
        if isinstance(task, Exception):
            raise task
        t = _reordered(task, seed, cfg.reorder)
        dmin = diagnose(t, 1, CheckSession())
        for m in cfg.m:
            rows.extend(run_scenario(t, m, cfg.repeats, model_id=model_id, fraction=fraction,
                                     reorder_index=r, seed=seed, delta_min=dmin))
    except Exception as exc:  # a failing row must not abort the suite
        log.warning("scenario %s/%s/%s failed: %s", model_id, fraction, r, exc)
        rows = [ScenarioResult(model_id, *shape, m, fraction, r, rep, 0, 0, 0.0, float("nan"), float("nan"),
                               seed, f"{type(exc).__name__}: {exc}")
                for m in cfg.m for rep in range(1, cfg.repeats + 1)]
    return rows


def run_suite(config) -> SuiteResult:
    """Cartesian run of models x fractions x reorderings x m x repeats."""
    cfg = config if isinstance(config, SuiteConfig) else SuiteConfig.from_dict(config)
    units = list(_units(cfg))
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            chunks = list(pool.map(lambda u: _run_unit(cfg, u), units))
    else:
        chunks = [_run_unit(cfg, u) for u in units]
    rows = [r for chunk in chunks for r in chunk]
    summary = []
    good = [r for r in rows if not r.error]
    if good:
        for s in aggregate(good, ("num_vars", "m")):
            s["group_vars"] = s.pop("num_vars")
            summary.append(s)
    return SuiteResult(rows, summary)


# --- evolutionary comparison -------------------------------------------------------

@dataclass
class ComparisonRow:
    model_id: str
    num_vars: int
    approach: str
    status: str
    delta_size: int
    checks: int
    elapsed_ms: float
    minimality: float
    accuracy: float


def compare_with_evolutionary(task, params: EvolutionParams | None = None, model_id="task") -> list:
    """FlexDiag (m=1) against the evolutionary baseline on one task.

    Metrics are taken against the FlexDiag m=1 diagnosis. A partial
    evolutionary result keeps its status in its own column.
    """
    flex = diagnose(task, 1, CheckSession())
    fs = CheckSession()
    evo = evolutionary_diagnose(task, params, fs)
    out = []
    for name, d, checks in (("flexdiag", flex, flex.checks + flex.guard_checks), ("evolutionary", evo, fs.counter)):
        if d.elements and flex.elements:
            mn, ac = minimality(d.ids, flex.ids), accuracy(d.ids, flex.ids)
        else:
            mn = ac = float("nan")
        out.append(ComparisonRow(model_id, len(task.variables), name, d.status.value, len(d), checks,
                                 d.elapsed * 1000.0, mn, ac))
    return out


# --- seeded random CSP tasks ---------------------------------------------------------

_BINARY_OPS = ("!=", "==", "<", "<=", "clause")


def _binary(rng, va, vb):
    op = _BINARY_OPS[int(rng.integers(len(_BINARY_OPS)))]
    if op == "clause":
        x = int(rng.choice(va.domain.values))
        y = int(rng.choice(vb.domain.values))
        return Logic("or", Compare("!=", Var(va.name), Const(x)), Compare("!=", Var(vb.name), Const(y)))
    return Compare(op, Var(va.name), Var(vb.name))


def random_csp_task(seed: int, num_vars: int, max_domain: int = 3, density: float = 1.2,
                    max_new_requirements: int = 3, mixed: bool = False) -> ReconfigurationTask:
    """A small random reconfiguration task whose S conflicts with its new requirements.

    C is built from random binary constraints kept only while C stays
    satisfiable; S is a random solution of C; the new requirements pin a
    few variables to the values of a second solution. With ``mixed`` the
    requirements are instead random binary constraints that the second
    solution satisfies and S violates, which leaves room for several
    minimal diagnoses.
    """
    rng = np.random.default_rng(seed)
    variables = []
    for i in range(num_vars):
        d = int(rng.integers(2, max_domain + 1))
        variables.append(Variable(f"v{i}", Domain.range(0, d - 1)))
    kb = []
    target = max(1, int(round(density * num_vars)))
    attempts = 0
    while len(kb) < target and attempts < 20 * target:
        attempts += 1
        a, b = (int(x) for x in rng.choice(num_vars, size=2, replace=False))
        ast = _binary(rng, variables[a], variables[b])
        cand = ConstraintExpr.from_ast(f"c{len(kb) + 1}", ast)
        if ConstraintModel(variables, kb + [cand]).is_consistent([c.id for c in kb] + [cand.id]):
            kb.append(cand)

    def random_solution(extra=()):
        order = {v.name: [v.domain.values[j] for j in rng.permutation(len(v.domain))] for v in variables}
        model = ConstraintModel(variables, kb + list(extra))
        return model.solve([c.id for c in kb] + [e.id for e in extra], value_order=order)

    S = random_solution().assignment
    differ = ConstraintExpr.from_ast(
        "_differ", conjoin("or", [Compare("!=", Var(n), Const(a)) for n, a in S.items()]))
    alt = random_solution([differ])
    solution = [AssignmentConstraint(f"s{i + 1}", v.name, S[v.name]) for i, v in enumerate(variables)]
    if alt is None:
        # single-solution C: require a value S does not have, C ∪ R then inconsistent
        v = variables[0]
        other = next(x for x in v.domain.values if x != S[v.name])
        reqs = [ConstraintExpr.from_ast("r1", Compare("==", Var(v.name), Const(other)))]
        return ReconfigurationTask(variables, kb, solution, reqs)
    S2 = alt.assignment
    diff = [n for n in S if S2[n] != S[n]]
    if mixed:
        reqs = []
        names = [v.name for v in variables]
        want = int(rng.integers(1, max_new_requirements + 1))
        for _ in range(50 * want):
            if len(reqs) == want:
                break
            a = diff[int(rng.integers(len(diff)))]
            b = names[int(rng.choice([i for i, n in enumerate(names) if n != a]))]
            va, vb = variables[names.index(a)], variables[names.index(b)]
            ast = _binary(rng, *((va, vb) if rng.random() < 0.5 else (vb, va)))
            if truth(ast, S2) and not truth(ast, S) and all(r.ast != ast for r in reqs):
                reqs.append(ConstraintExpr.from_ast(f"r{len(reqs) + 1}", ast))
        if reqs:
            return ReconfigurationTask(variables, kb, solution, reqs)
    k = int(rng.integers(1, min(max_new_requirements, len(diff)) + 1))
    picked = [diff[int(i)] for i in rng.choice(len(diff), size=k, replace=False)]
    reqs = [ConstraintExpr.from_ast(f"r{i + 1}", Compare("==", Var(n), Const(S2[n])))
            for i, n in enumerate(sorted(picked, key=lambda n: int(n[1:])))]
    return ReconfigurationTask(variables, kb, solution, reqs)
