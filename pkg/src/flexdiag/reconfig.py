"""Reconfiguration: validate a task, diagnose, repair, and enumerate diagnoses."""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from .diagnosis import Diagnosis, Status, flexdiag
from .engine import CheckSession


class NoDiagnosis(RuntimeError):
    """No subset of the existing configuration can be revised to meet the requirements."""


@dataclass
class ValidationReport:
    kb_consistent: bool
    requirements_consistent: bool
    solution_complete: bool
    already_consistent: bool

    @property
    def ok(self) -> bool:
        return self.kb_consistent and self.requirements_consistent and self.solution_complete

    @property
    def reconfiguration_needed(self) -> bool:
        return self.ok and not self.already_consistent

    def lines(self):
        yield f"(a) knowledge base consistent: {'pass' if self.kb_consistent else 'FAIL'}"
        yield (f"(b) requirements consistent with knowledge base: "
               f"{'pass' if self.requirements_consistent else 'FAIL (requirements must be revised)'}")
        yield f"(c) existing configuration complete: {'pass' if self.solution_complete else 'FAIL'}"
        verdict = "consistent (no reconfiguration needed)" if self.already_consistent else \
            "inconsistent (reconfiguration needed)"
        yield f"(d) configuration with new requirements: {verdict}"


def _ids(cs):
    return [c.id for c in cs]


def validate_task(task, session: CheckSession | None = None) -> ValidationReport:
    model = task.model
    C, R, S = _ids(task.kb), _ids(task.requirements), _ids(task.solution)
    kb_ok = model.is_consistent(C, session)
    req_ok = kb_ok and model.is_consistent(C + R, session)
    complete = {s.variable for s in task.solution} == {v.name for v in task.variables}
    already = req_ok and model.is_consistent(C + R + S, session)
    return ValidationReport(kb_ok, req_ok, complete, already)


def diagnose(task, m: int = 1, session: CheckSession | None = None, precheck: bool = False) -> Diagnosis:
    """FlexDiag over the task's solution in its importance ordering."""
    return flexdiag(task.model, task.ordering, _ids(task.kb), _ids(task.requirements), m, session, precheck)


@dataclass
class Reconfiguration:
    delta: Diagnosis
    reassignments: dict
    repaired: dict
    original: dict = field(repr=False)

    @property
    def changed(self):
        return [(var, self.original[var], new) for var, new in self.reassignments.items()
                if new != self.original[var]]

    @property
    def unchanged_in_delta(self):
        return [var for var, new in self.reassignments.items() if new == self.original[var]]

    def report(self) -> dict:
        return {
            "delta": list(self.delta.elements),
            "changed": [{"var": v, "old": old, "new": new} for v, old, new in self.changed],
            "unchanged_in_delta": self.unchanged_in_delta,
            "repaired": dict(self.repaired),
            "checks": self.delta.checks + self.delta.guard_checks,
            "elapsed_ms": round(self.delta.elapsed * 1000.0, 3),
        }


def reconfigure(task, m: int = 1, session: CheckSession | None = None) -> Reconfiguration:
    """Diagnose and repair: the repaired configuration keeps S outside the diagnosis.

    Values inside the diagnosis are re-derived by the solver; no disequality
    with the old value is imposed, so a member of the diagnosis may keep its
    value (reported under ``unchanged_in_delta``).
    """
    if session is None:
        session = CheckSession()
    delta = diagnose(task, m, session)
    if delta.status is Status.NONE_EXISTS:
        raise NoDiagnosis("requirements cannot be met by revising the existing configuration")
    by_id = {s.id: s for s in task.solution}
    keep = [s.id for s in task.solution if s.id not in delta.ids]
    start = time.perf_counter()
    sol = task.model.solve(_ids(task.kb) + _ids(task.requirements) + keep, session)
    delta.elapsed += time.perf_counter() - start
    if sol is None:  # pragma: no cover - a found diagnosis guarantees consistency
        raise NoDiagnosis("repair failed although a diagnosis was found")
    original = task.assignment
    reassignments = {by_id[sid].variable: sol.assignment[by_id[sid].variable] for sid in delta.elements}
    return Reconfiguration(delta, reassignments, sol.assignment, original)


@dataclass
class HsdagNode:
    path_label: frozenset
    diagnosis: Diagnosis | None = None
    closed: bool = False
    children: dict = field(default_factory=dict)


def _subset_prune(diagnoses):
    keep = []
    for d in diagnoses:
        if not any(o.ids < d.ids for o in diagnoses):
            keep.append(d)
    return keep


def enumerate_diagnoses(task, m: int = 1, k: int | None = None,
                        session: CheckSession | None = None, max_nodes: int = 100_000) -> list:
    """Breadth-first hitting-set DAG with FlexDiag as node labeler.

    A node's path label holds candidates that must be kept; its diagnosis is
    computed over the ordered solution minus the path label, with the full
    solution still in the background. Known diagnoses disjoint from a path
    are reused; paths that contain a closed path are closed; equal paths
    are merged. For m>1 the output is pruned to subset-minimal labels.
    """
    if session is None:
        session = CheckSession()
    C, R = _ids(task.kb), _ids(task.requirements)
    S = list(task.ordering)
    model = task.model

    found: list[Diagnosis] = []
    closed_paths: list[frozenset] = []
    seen: dict[frozenset, HsdagNode] = {}
    root = HsdagNode(frozenset())
    seen[root.path_label] = root
    queue = deque([root])
    expanded = 0

    while queue and (k is None or len(found) < k) and expanded < max_nodes:
        node = queue.popleft()
        expanded += 1
        P = node.path_label
        if any(cp <= P for cp in closed_paths):
            node.closed = True
            continue
        label = next((d for d in found if not (d.ids & P)), None)
        if label is None:
            cands = [s for s in S if s not in P]
            diag = flexdiag(model, cands, C, R + sorted(P), m, session, precheck=not P)
            if diag.status is Status.NOT_NEEDED:
                return []
            if diag.status is not Status.FOUND:
                if not P:
                    raise NoDiagnosis("no diagnosis exists in the existing configuration")
                node.closed = True
                closed_paths.append(P)
                continue
            found.append(diag)
            label = diag
        node.diagnosis = label
        for sid in label.elements:
            child_path = P | {sid}
            child = seen.get(child_path)
            if child is None:
                child = seen[child_path] = HsdagNode(child_path)
                queue.append(child)
            node.children[sid] = child

    if m > 1:
        found = _subset_prune(found)
    return found if k is None else found[:k]
