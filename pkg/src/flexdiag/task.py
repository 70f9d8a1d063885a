"""Variables, domains, constraints and the JSON task document."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .expr import Compare, Const, ExpressionError, Var, parse, to_text, variables_of

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class TaskError(ValueError):
    """Invalid task document or task contents."""


@dataclass(frozen=True)
class Domain:
    kind: str  # 'bool', 'set' or 'range'
    values: tuple

    def __post_init__(self):
        if self.kind not in ("bool", "set", "range"):
            raise TaskError(f"unknown domain kind {self.kind!r}")
        if not self.values:
            raise TaskError("empty domain")

    @classmethod
    def boolean(cls):
        return cls("bool", (0, 1))

    @classmethod
    def of(cls, values):
        return cls("set", tuple(sorted(set(int(v) for v in values))))

    @classmethod
    def range(cls, lo: int, hi: int):
        if lo > hi:
            raise TaskError(f"range domain with min {lo} > max {hi}")
        return cls("range", tuple(range(lo, hi + 1)))

    def __contains__(self, value):
        return value in self.values

    def __len__(self):
        return len(self.values)

    def to_json(self):
        if self.kind == "bool":
            return {"kind": "bool"}
        if self.kind == "range":
            return {"kind": "range", "min": self.values[0], "max": self.values[-1]}
        return {"kind": "set", "values": list(self.values)}


@dataclass(frozen=True)
class Variable:
    name: str
    domain: Domain

    def __post_init__(self):
        if not _IDENT.match(self.name):
            raise TaskError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True)
class ConstraintExpr:
    id: str
    source_text: str
    ast: object = field(compare=False, repr=False)

    @classmethod
    def from_ast(cls, cid, ast):
        return cls(cid, to_text(ast), ast)

    @cached_property
    def scope(self) -> frozenset:
        return variables_of(self.ast)


@dataclass(frozen=True)
class AssignmentConstraint:
    """``variable == value``; one element of an existing configuration."""

    id: str
    variable: str
    value: int

    @cached_property
    def ast(self):
        return Compare("==", Var(self.variable), Const(self.value))

    @property
    def source_text(self):
        return f"{self.variable} == {self.value}"

    @property
    def scope(self) -> frozenset:
        return frozenset((self.variable,))


def parse_constraint(cid: str, text: str, variables: Sequence[Variable]) -> ConstraintExpr:
    domains = {v.name: v.domain.values for v in variables}
    return ConstraintExpr(cid, text, parse(text, domains))


def _check_ids(constraints, seen=None):
    seen = set() if seen is None else seen
    for c in constraints:
        if not _IDENT.match(c.id):
            raise TaskError(f"invalid constraint id {c.id!r}")
        if c.id in seen:
            raise TaskError(f"duplicate id {c.id!r}")
        seen.add(c.id)
    return seen


def _check_scope(constraints, names):
    for c in constraints:
        missing = c.scope - names
        if missing:
            raise TaskError(f"constraint {c.id!r} references unknown variable(s) {sorted(missing)}")


@dataclass
class ConfigurationTask:
    variables: list
    kb: list
    requirements: list = field(default_factory=list)

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise TaskError("duplicate variable name")
        _check_ids(self.requirements, _check_ids(self.kb))
        _check_scope(self.kb + self.requirements, set(names))


@dataclass
class ReconfigurationTask:
    """An existing configuration plus changed requirements.

    ``ordering`` lists solution ids from lowest to highest importance; it is
    the order in which candidates are handed to the diagnosis.
    """

    variables: list
    kb: list
    solution: list
    requirements: list
    ordering: list | None = None

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise TaskError("duplicate variable name")
        ids = _check_ids(self.kb)
        ids = _check_ids(self.requirements, ids)
        _check_ids(self.solution, ids)
        _check_scope(self.kb + self.requirements, set(names))
        domains = {v.name: v.domain for v in self.variables}
        covered = []
        for s in self.solution:
            if s.variable not in domains:
                raise TaskError(f"solution entry {s.id!r} names unknown variable {s.variable!r}")
            if s.value not in domains[s.variable]:
                raise TaskError(f"out-of-domain value {s.value} for {s.variable!r} in {s.id!r}")
            covered.append(s.variable)
        if len(set(covered)) != len(covered):
            raise TaskError("solution assigns a variable twice")
        missing = [n for n in names if n not in set(covered)]
        if missing:
            raise TaskError(f"incomplete solution: no assignment for {', '.join(missing)}")
        sids = [s.id for s in self.solution]
        if self.ordering is None:
            self.ordering = list(sids)
        elif sorted(self.ordering) != sorted(sids):
            raise TaskError("ordering must be a permutation of the solution ids")
        else:
            self.ordering = list(self.ordering)

    @property
    def constraints(self):
        return self.kb + self.requirements + self.solution

    @property
    def assignment(self) -> dict:
        return {s.variable: s.value for s in self.solution}

    def by_id(self) -> dict:
        return {c.id: c for c in self.constraints}

    def with_ordering(self, ordering) -> "ReconfigurationTask":
        out = ReconfigurationTask(self.variables, self.kb, self.solution, self.requirements, list(ordering))
        if "model" in self.__dict__:
            out.__dict__["model"] = self.model
        return out

    @cached_property
    def model(self):
        from .engine import ConstraintModel

        return ConstraintModel(self.variables, self.constraints)


# --- JSON document -----------------------------------------------------------

def _domain_from_json(obj) -> Domain:
    kind = obj.get("kind")
    if kind == "bool":
        return Domain.boolean()
    if kind == "set":
        return Domain.of(obj["values"])
    if kind == "range":
        return Domain.range(int(obj["min"]), int(obj["max"]))
    raise TaskError(f"unknown domain kind {kind!r}")


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise TaskError(f"schema violation: {where} needs field {key!r}")
    return obj[key]


def task_from_dict(doc: dict) -> ReconfigurationTask:
    if not isinstance(doc, dict):
        raise TaskError("schema violation: task document must be an object")
    try:
        variables = [
            Variable(_require(v, "name", "variable"), _domain_from_json(_require(v, "domain", "variable")))
            for v in _require(doc, "variables", "task")
        ]

        def exprs(key):
            out = []
            for item in doc.get(key, []):
                cid = _require(item, "id", key)
                out.append(parse_constraint(cid, _require(item, "expr", key), variables))
            return out

        kb = exprs("kb")
        requirements = exprs("requirements")
        solution = [
            AssignmentConstraint(_require(s, "id", "solution"), _require(s, "var", "solution"),
                                 int(_require(s, "value", "solution")))
            for s in _require(doc, "solution", "task")
        ]
    except ExpressionError as exc:
        raise TaskError(str(exc)) from exc
    except (TypeError, KeyError) as exc:
        raise TaskError(f"schema violation: {exc}") from exc
    return ReconfigurationTask(variables, kb, solution, requirements, doc.get("ordering"))


def load_task(document: bytes | str) -> ReconfigurationTask:
    """Parse and validate a task document (JSON, UTF-8)."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TaskError(f"schema violation: not valid JSON ({exc})") from exc
    return task_from_dict(doc)


def load_task_file(path) -> ReconfigurationTask:
    with open(path, "rb") as fh:
        return load_task(fh.read())


def task_to_dict(task: ReconfigurationTask) -> dict:
    return {
        "variables": [{"name": v.name, "domain": v.domain.to_json()} for v in task.variables],
        "kb": [{"id": c.id, "expr": c.source_text} for c in task.kb],
        "solution": [{"id": s.id, "var": s.variable, "value": s.value} for s in task.solution],
        "requirements": [{"id": r.id, "expr": r.source_text} for r in task.requirements],
        "ordering": list(task.ordering),
    }


def dump_task(task: ReconfigurationTask) -> str:
    return json.dumps(task_to_dict(task), indent=2) + "\n"
