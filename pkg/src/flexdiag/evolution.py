"""Genetic-algorithm baseline for diagnosis.

Genome: one bit per element of S (set = element is in the diagnosis).
Fitness is minimised: ``|delta|`` for genomes whose removal restores
consistency, otherwise ``|S|`` plus the constraints of C and R still
violated after one greedy repair pass over the freed variables.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .diagnosis import Diagnosis, Status
from .engine import BudgetExceeded, CheckSession
from .kernels import greedy_repair


@dataclass
class EvolutionParams:
    population_size: int = 50
    generations: int = 500
    crossover_rate: float = 0.8
    mutation_rate: float | None = None  # default 1/|S|
    tournament_size: int = 3
    seed: int = 0
    init: str = "random"  # or "ones"
    init_density: float = 0.5

    def __post_init__(self):
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.population_size < 1 or self.tournament_size < 1:
            raise ValueError("population and tournament sizes must be >= 1")
        for rate in (self.crossover_rate, self.mutation_rate, self.init_density):
            if rate is not None and not 0.0 <= rate <= 1.0:
                raise ValueError("rates must lie in [0, 1]")
        if self.init not in ("random", "ones"):
            raise ValueError("init must be 'random' or 'ones'")


class _Fitness:
    def __init__(self, task, session):
        self.task = task
        self.session = session
        self.model = task.model
        cm = self.model.compiled
        self.cm = cm
        self.S = list(task.ordering)
        by_id = {s.id: s for s in task.solution}
        self.var_of = np.array([cm.index[by_id[sid].variable] for sid in self.S], dtype=np.int64)
        self.background = [c.id for c in task.kb] + [r.id for r in task.requirements]
        self.active = self.model._active(self.background)
        base = np.zeros(len(task.variables), dtype=np.int64)
        for s in task.solution:
            base[cm.index[s.variable]] = s.value
        self.base = base
        self.sv = np.zeros(cm.stack_size, dtype=np.int64)
        self.sk = np.zeros(cm.stack_size, dtype=np.int64)
        self.memo = {}

    def __call__(self, genome) -> tuple:
        key = genome.tobytes()
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        removed = {self.S[i] for i in np.flatnonzero(genome)}
        keep = [sid for sid in self.S if sid not in removed]
        if self.model.is_consistent(self.background + keep, self.session):
            result = (float(len(removed)), True)
        else:
            cm = self.cm
            value = self.base.copy()
            free = self.var_of[genome.astype(bool)]
            bad = greedy_repair(cm.ops, cm.args, cm.cstart, cm.cend, cm.vals, cm.dsize,
                                self.active, free, value, self.sv, self.sk)
            result = (float(len(self.S) + bad), False)
        self.memo[key] = result
        return result


def evolutionary_diagnose(task, params: EvolutionParams | None = None,
                          session: CheckSession | None = None) -> Diagnosis:
    """Evolve a diagnosis; status is ``partial`` if the best genome does not restore consistency."""
    params = params or EvolutionParams()
    session = session or CheckSession()
    rng = np.random.default_rng(params.seed)
    fit = _Fitness(task, session)
    n = len(fit.S)
    start = time.perf_counter()
    base = session.counter
    if n == 0:
        return Diagnosis((), 1, 0, 0, 0.0, Status.NONE_EXISTS)
    mut = params.mutation_rate if params.mutation_rate is not None else 1.0 / n
    P = params.population_size

    if params.init == "ones":
        pop = np.ones((P, n), dtype=np.uint8)
    else:
        pop = (rng.random((P, n)) < params.init_density).astype(np.uint8)
    scores = np.array([fit(g)[0] for g in pop])

    for _ in range(params.generations):
        if session.expired():
            raise BudgetExceeded("time budget exhausted during evolution")
        elite = pop[int(np.argmin(scores))].copy()
        children = [elite]
        while len(children) < P:
            parents = []
            for _ in range(2):
                contenders = rng.integers(0, P, size=params.tournament_size)
                parents.append(pop[contenders[int(np.argmin(scores[contenders]))]])
            a, b = parents[0].copy(), parents[1].copy()
            if n > 1 and rng.random() < params.crossover_rate:
                cut = int(rng.integers(1, n))
                a[cut:], b[cut:] = parents[1][cut:], parents[0][cut:]
            for child in (a, b):
                flips = rng.random(n) < mut
                child[flips] ^= 1
                children.append(child)
        pop = np.array(children[:P], dtype=np.uint8)
        scores = np.array([fit(g)[0] for g in pop])

    best = pop[int(np.argmin(scores))]
    _, valid = fit(best)
    elements = tuple(fit.S[i] for i in np.flatnonzero(best))
    status = Status.FOUND if valid else Status.PARTIAL
    return Diagnosis(elements, 1, session.counter - base, 0, time.perf_counter() - start, status)

