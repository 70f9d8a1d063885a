"""Consistency checking and solving with an instrumented check counter."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .kernels import EXHAUSTED, FOUND, CompiledModel, SearchState

# node expansions between wall-clock checks
QUOTA = 2048


class BudgetExceeded(RuntimeError):
    """The session's time budget ran out during a consistency check."""


@dataclass
class CheckSession:
    """Counts logical consistency checks for one diagnosis run.

    ``counter`` grows by exactly one per ``is_consistent`` call, cache hits
    included. ``time_budget`` is in seconds, measured from construction.
    """

    time_budget: float | None = None
    use_cache: bool = False
    counter: int = 0
    nodes: int = 0
    cache: dict = field(default_factory=dict, repr=False)
    started: float = field(default_factory=time.perf_counter, repr=False)

    @property
    def deadline(self):
        if self.time_budget is None:
            return None
        return self.started + self.time_budget

    def expired(self) -> bool:
        deadline = self.deadline
        return deadline is not None and time.perf_counter() > deadline


@dataclass(frozen=True)
class Solution:
    assignment: dict


class ConstraintModel:
    """Variables plus a pool of identified constraints, compiled once.

    Checks name a subset of the pool by id; the subset is the active
    constraint set for that search.
    """

    def __init__(self, variables, constraints):
        self.variables = list(variables)
        self.constraints = list(constraints)
        self.ids = [c.id for c in self.constraints]
        self.position = {cid: i for i, cid in enumerate(self.ids)}
        if len(self.position) != len(self.ids):
            raise ValueError("duplicate constraint id in model")
        self.compiled = CompiledModel(self.variables, self.constraints)

    def __repr__(self):
        return f"ConstraintModel(|V|={len(self.variables)}, constraints={len(self.ids)})"

    def _active(self, ids):
        mask = np.zeros(len(self.ids), dtype=np.bool_)
        for cid in ids:
            mask[self.position[cid]] = True
        return mask

    def _search(self, ids, session, order=None):
        state = SearchState(self.compiled, self._active(ids), order)
        while True:
            if session is not None and session.expired():
                raise BudgetExceeded(f"time budget of {session.time_budget:.3f}s exhausted")
            status = state.advance(QUOTA)
            if status in (FOUND, EXHAUSTED):
                if session is not None:
                    session.nodes += state.nodes
                return state

    def is_consistent(self, ids, session: CheckSession | None = None) -> bool:
        """True iff some total assignment satisfies every constraint in ``ids``."""
        if session is not None:
            session.counter += 1
            if session.use_cache:
                key = (id(self), frozenset(ids))
                hit = session.cache.get(key)
                if hit is not None:
                    return hit
        result = self._search(ids, session).status == FOUND
        if session is not None and session.use_cache:
            session.cache[key] = result
        return result

    def solve(self, ids, session: CheckSession | None = None, value_order=None) -> Solution | None:
        """Return a satisfying total assignment, or None.

        ``value_order`` optionally maps each variable name to a permutation of
        its domain values (tried first to last); the default is ascending.
        """
        order = None
        if value_order is not None:
            order = self.compiled.ascending.copy()
            for v in self.variables:
                if v.name in value_order:
                    pos = {val: j for j, val in enumerate(v.domain.values)}
                    perm = [pos[val] for val in value_order[v.name]]
                    if sorted(perm) != list(range(len(v.domain))):
                        raise ValueError(f"value order for {v.name!r} is not a permutation of its domain")
                    order[self.compiled.index[v.name], : len(perm)] = perm
        state = self._search(ids, session, order)
        if state.status != FOUND:
            return None
        return Solution({v.name: int(state.value[i]) for i, v in enumerate(self.variables)})

    def extended(self, extra):
        """A new model over the same variables with additional constraints."""
        return ConstraintModel(self.variables, self.constraints + list(extra))


def _adhoc_model(constraints, variables, session):
    constraints = list(constraints)
    key = ("model", tuple(v.name for v in variables), tuple(c.id for c in constraints),
           tuple(id(c) for c in constraints))
    if session is not None:
        model = session.cache.get(key)
        if model is None:
            model = session.cache[key] = ConstraintModel(variables, constraints)
        return model
    return ConstraintModel(variables, constraints)


def is_consistent(constraints, variables, session: CheckSession | None = None) -> bool:
    """Consistency of an explicit constraint collection over ``variables``."""
    constraints = list(constraints)
    model = _adhoc_model(constraints, variables, session)
    return model.is_consistent([c.id for c in constraints], session)


def solve(constraints, variables, session: CheckSession | None = None, value_order=None):
    constraints = list(constraints)
    model = _adhoc_model(constraints, variables, session)
    return model.solve([c.id for c in constraints], session, value_order)
