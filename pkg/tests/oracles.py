"""Reference implementations used only by the tests.

These evaluate constraint ASTs over the full grid of total assignments with
numpy broadcasting. They share nothing with the search kernels beyond the
AST node classes, so agreement between the two is meaningful.
"""
from __future__ import annotations

import itertools

import numpy as np

from flexdiag.expr import Arith, Atom, BoolConst, Compare, Const, Logic, Neg, Not, Var

_CMP = {"==": np.equal, "!=": np.not_equal, "<": np.less, "<=": np.less_equal,
        ">": np.greater, ">=": np.greater_equal}


def grid(variables):
    """Columns of every total assignment, keyed by variable name."""
    axes = [np.asarray(v.domain.values, dtype=np.int64) for v in variables]
    if not axes:
        return {}, 1
    mesh = np.meshgrid(*axes, indexing="ij")
    return {v.name: m.ravel() for v, m in zip(variables, mesh)}, mesh[0].size


def np_value(node, cols, size):
    if isinstance(node, Const):
        return np.full(size, node.value, dtype=np.int64)
    if isinstance(node, Var):
        return cols[node.name]
    if isinstance(node, Neg):
        return -np_value(node.operand, cols, size)
    if isinstance(node, Arith):
        a, b = np_value(node.left, cols, size), np_value(node.right, cols, size)
        return a + b if node.op == "+" else a - b
    raise TypeError(node)


def np_truth(node, cols, size):
    if isinstance(node, BoolConst):
        return np.full(size, bool(node.value))
    if isinstance(node, Atom):
        return cols[node.name] == 1
    if isinstance(node, Not):
        return ~np_truth(node.operand, cols, size)
    if isinstance(node, Compare):
        return _CMP[node.op](np_value(node.left, cols, size), np_value(node.right, cols, size))
    if isinstance(node, Logic):
        a, b = np_truth(node.left, cols, size), np_truth(node.right, cols, size)
        if node.op == "and":
            return a & b
        if node.op == "or":
            return a | b
        if node.op == "->":
            return ~a | b
        return a == b
    raise TypeError(node)


def satisfying_rows(variables, constraints):
    """Boolean mask over the grid of rows satisfying every constraint."""
    cols, size = grid(variables)
    ok = np.ones(size, dtype=bool)
    for c in constraints:
        ok &= np_truth(c.ast, cols, size)
    return cols, ok


def solution_set(variables, constraints):
    cols, ok = satisfying_rows(variables, constraints)
    names = [v.name for v in variables]
    return {tuple(int(cols[n][i]) for n in names) for i in np.flatnonzero(ok)}


def min_diagnoses(task):
    """Subset-minimal diagnoses from the solutions of C and R.

    Every solution of C and R induces the diagnosis of the S elements it
    disagrees with; the minimal ones among these are exactly the minimal
    diagnoses.
    """
    cols, ok = satisfying_rows(task.variables, task.kb + task.requirements)
    rows = np.flatnonzero(ok)
    if rows.size == 0:
        return []
    differs = np.stack([cols[s.variable][rows] != s.value for s in task.solution], axis=1)
    ids = [s.id for s in task.solution]
    cands = {frozenset(ids[j] for j in np.flatnonzero(r)) for r in np.unique(differs, axis=0)}
    return sorted((c for c in cands if not any(o < c for o in cands)), key=lambda c: (len(c), sorted(c)))


def truth_table(node, names, domains):
    """Python-level truth table, one assignment at a time."""
    out = {}
    for combo in itertools.product(*(domains[n] for n in names)):
        asg = dict(zip(names, combo))
        cols = {n: np.array([v]) for n, v in asg.items()}
        out[combo] = bool(np_truth(node, cols, 1)[0])
    return out
