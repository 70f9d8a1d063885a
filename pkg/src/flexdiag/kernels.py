"""Postfix constraint bytecode and the backtracking / forward-checking kernel.

Every constraint is compiled to a postfix program over a single value stack
whose entries carry a ``known`` flag, which gives Kleene three-valued
semantics on partial assignments. The search state lives entirely in
arrays so the kernel can be resumed after a bounded number of node
expansions; the caller checks the wall clock between chunks.
"""
import numpy as np

from ._accel import jit
from .expr import Arith, Atom, BoolConst, Compare, Const, Logic, Neg, Not, Var

OP_CONST = 0
OP_VAR = 1
OP_ATOM = 2
OP_NEG = 3
OP_ADD = 4
OP_SUB = 5
OP_EQ = 6
OP_NE = 7
OP_LT = 8
OP_LE = 9
OP_GT = 10
OP_GE = 11
OP_NOT = 12
OP_AND = 13
OP_OR = 14
OP_IMP = 15
OP_IFF = 16

_CMP_OPS = {"==": OP_EQ, "!=": OP_NE, "<": OP_LT, "<=": OP_LE, ">": OP_GT, ">=": OP_GE}
_LOGIC_OPS = {"and": OP_AND, "or": OP_OR, "->": OP_IMP, "<->": OP_IFF}

RUNNING = 0
FOUND = 1
EXHAUSTED = 2

# ctl slots
DEPTH = 0
TRAIL = 1
STATUS = 2
NODES = 3

TRUE_ = 1
FALSE_ = 0
UNDETERMINED = 2


def compile_ast(node, index, out):
    """Append the postfix program for ``node`` to ``out`` as (op, arg) pairs."""
    if isinstance(node, Const):
        out.append((OP_CONST, node.value))
    elif isinstance(node, BoolConst):
        out.append((OP_CONST, 1 if node.value else 0))
    elif isinstance(node, Var):
        out.append((OP_VAR, index[node.name]))
    elif isinstance(node, Atom):
        out.append((OP_ATOM, index[node.name]))
    elif isinstance(node, Neg):
        compile_ast(node.operand, index, out)
        out.append((OP_NEG, 0))
    elif isinstance(node, Not):
        compile_ast(node.operand, index, out)
        out.append((OP_NOT, 0))
    elif isinstance(node, Arith):
        compile_ast(node.left, index, out)
        compile_ast(node.right, index, out)
        out.append((OP_ADD if node.op == "+" else OP_SUB, 0))
    elif isinstance(node, Compare):
        compile_ast(node.left, index, out)
        compile_ast(node.right, index, out)
        out.append((_CMP_OPS[node.op], 0))
    elif isinstance(node, Logic):
        compile_ast(node.left, index, out)
        compile_ast(node.right, index, out)
        out.append((_LOGIC_OPS[node.op], 0))
    else:
        raise TypeError(f"cannot compile {node!r}")
    return out


@jit
def eval_program(ops, args, lo, hi, assigned, value, sv, sk):
    """Run one program; returns TRUE_, FALSE_ or UNDETERMINED."""
    top = 0
    for pc in range(lo, hi):
        op = ops[pc]
        if op == OP_CONST:
            sv[top] = args[pc]
            sk[top] = 1
            top += 1
        elif op == OP_VAR:
            x = args[pc]
            sv[top] = value[x]
            sk[top] = 1 if assigned[x] else 0
            top += 1
        elif op == OP_ATOM:
            x = args[pc]
            sv[top] = 1 if value[x] != 0 else 0
            sk[top] = 1 if assigned[x] else 0
            top += 1
        elif op == OP_NEG:
            sv[top - 1] = -sv[top - 1]
        elif op == OP_NOT:
            sv[top - 1] = 1 - sv[top - 1]
        else:
            top -= 1
            b = sv[top]
            kb = sk[top]
            a = sv[top - 1]
            ka = sk[top - 1]
            r = 0
            k = ka & kb
            if op == OP_ADD:
                r = a + b
            elif op == OP_SUB:
                r = a - b
            elif op == OP_EQ:
                r = 1 if a == b else 0
            elif op == OP_NE:
                r = 1 if a != b else 0
            elif op == OP_LT:
                r = 1 if a < b else 0
            elif op == OP_LE:
                r = 1 if a <= b else 0
            elif op == OP_GT:
                r = 1 if a > b else 0
            elif op == OP_GE:
                r = 1 if a >= b else 0
            else:
                if op == OP_IMP:
                    a = 1 - a
                    op = OP_OR
                if op == OP_AND:
                    if (ka == 1 and a == 0) or (kb == 1 and b == 0):
                        r = 0
                        k = 1
                    else:
                        r = 1
                elif op == OP_OR:
                    if (ka == 1 and a == 1) or (kb == 1 and b == 1):
                        r = 1
                        k = 1
                    else:
                        r = 0
                else:
                    r = 1 if a == b else 0
            sv[top - 1] = r
            sk[top - 1] = k
    if sk[0] == 0:
        return UNDETERMINED
    return TRUE_ if sv[0] != 0 else FALSE_


@jit
def _prune_var(c, y, ops, args, cstart, cend, vals, dsize, alive, assigned, value,
               trail_var, trail_val, ctl, sv, sk):
    """Remove values of ``y`` that falsify constraint ``c``; False on wipe-out."""
    left = 0
    assigned[y] = True
    for j in range(dsize[y]):
        if alive[y, j] == 0:
            continue
        value[y] = vals[y, j]
        if eval_program(ops, args, cstart[c], cend[c], assigned, value, sv, sk) == FALSE_:
            alive[y, j] = 0
            t = ctl[TRAIL]
            trail_var[t] = y
            trail_val[t] = j
            ctl[TRAIL] = t + 1
        else:
            left += 1
    assigned[y] = False
    return left > 0


@jit
def _check_constraint(c, ops, args, cstart, cend, scope_ptr, scope_idx, vals, dsize, alive,
                      assigned, value, trail_var, trail_val, ctl, sv, sk):
    """Forward check one constraint after an assignment."""
    free = -1
    nfree = 0
    for p in range(scope_ptr[c], scope_ptr[c + 1]):
        y = scope_idx[p]
        if not assigned[y]:
            nfree += 1
            free = y
    if nfree == 1:
        return _prune_var(c, free, ops, args, cstart, cend, vals, dsize, alive, assigned, value,
                          trail_var, trail_val, ctl, sv, sk)
    return eval_program(ops, args, cstart[c], cend[c], assigned, value, sv, sk) != FALSE_


@jit
def init_search(ops, args, cstart, cend, scope_ptr, scope_idx, vals, dsize, active,
                alive, assigned, value, choice, seq, trail_var, trail_val, mark, ctl, sv, sk):
    """Reset state and apply root-level pruning. Returns False if trivially inconsistent."""
    n = dsize.shape[0]
    for x in range(n):
        assigned[x] = False
        choice[x] = 0
        value[x] = 0
        for j in range(alive.shape[1]):
            alive[x, j] = 1 if j < dsize[x] else 0
    ctl[DEPTH] = 0
    ctl[TRAIL] = 0
    ctl[STATUS] = RUNNING
    ctl[NODES] = 0
    for c in range(active.shape[0]):
        if not active[c]:
            continue
        if not _check_constraint(c, ops, args, cstart, cend, scope_ptr, scope_idx, vals, dsize,
                                 alive, assigned, value, trail_var, trail_val, ctl, sv, sk):
            ctl[STATUS] = EXHAUSTED
            return False
    # root prunings are never undone
    ctl[TRAIL] = 0
    mark[0] = 0
    if n == 0:
        ctl[STATUS] = FOUND
    else:
        seq[0] = _pick(alive, assigned, dsize)
    return True


@jit
def _pick(alive, assigned, dsize):
    """Unassigned variable with the fewest live values; lowest index on ties."""
    best = -1
    best_left = 0
    for y in range(dsize.shape[0]):
        if assigned[y]:
            continue
        left = 0
        for j in range(dsize[y]):
            left += alive[y, j]
        if best < 0 or left < best_left:
            best = y
            best_left = left
            if left <= 1:
                break
    return best


@jit
def _undo(to, alive, trail_var, trail_val, ctl):
    t = ctl[TRAIL]
    while t > to:
        t -= 1
        alive[trail_var[t], trail_val[t]] = 1
    ctl[TRAIL] = to


@jit
def run_search(ops, args, cstart, cend, scope_ptr, scope_idx, vc_ptr, vc_idx, vals, dsize, order,
               active, alive, assigned, value, choice, seq, trail_var, trail_val, mark, ctl, sv, sk, quota):
    """Advance chronological backtracking by at most ``quota`` node expansions.

    ``seq[d]`` is the variable branched on at depth ``d``, picked by fewest
    live values so that forced assignments come first; values are tried in
    the per-variable ``order``. Returns the status slot of ``ctl``.
    """
    n = dsize.shape[0]
    expanded = 0
    while ctl[STATUS] == RUNNING and expanded < quota:
        d = ctl[DEPTH]
        if d == n:
            ctl[STATUS] = FOUND
            break
        x = seq[d]
        pos = choice[d]
        while pos < dsize[x] and alive[x, order[x, pos]] == 0:
            pos += 1
        if pos >= dsize[x]:
            # exhausted: step back to the previous depth
            if d == 0:
                ctl[STATUS] = EXHAUSTED
                break
            d -= 1
            ctl[DEPTH] = d
            _undo(mark[d], alive, trail_var, trail_val, ctl)
            assigned[seq[d]] = False
            choice[d] += 1
            continue
        choice[d] = pos
        value[x] = vals[x, order[x, pos]]
        assigned[x] = True
        mark[d] = ctl[TRAIL]
        expanded += 1
        ctl[NODES] += 1
        ok = True
        for p in range(vc_ptr[x], vc_ptr[x + 1]):
            c = vc_idx[p]
            if not active[c]:
                continue
            if not _check_constraint(c, ops, args, cstart, cend, scope_ptr, scope_idx, vals, dsize,
                                     alive, assigned, value, trail_var, trail_val, ctl, sv, sk):
                ok = False
                break
        if ok:
            ctl[DEPTH] = d + 1
            if d + 1 < n:
                choice[d + 1] = 0
                seq[d + 1] = _pick(alive, assigned, dsize)
        else:
            _undo(mark[d], alive, trail_var, trail_val, ctl)
            assigned[x] = False
            choice[d] += 1
    return ctl[STATUS]


class CompiledModel:
    """Flat array form of a set of variables and constraints."""

    def __init__(self, variables, constraints):
        names = [v.name for v in variables]
        self.index = {name: i for i, name in enumerate(names)}
        n = len(names)
        maxd = max((len(v.domain) for v in variables), default=1)
        self.vals = np.zeros((n, maxd), dtype=np.int64)
        self.dsize = np.zeros(n, dtype=np.int64)
        for i, v in enumerate(variables):
            self.vals[i, : len(v.domain)] = v.domain.values
            self.dsize[i] = len(v.domain)

        ops, args, cstart, cend = [], [], [], []
        scope_ptr, scope_idx = [0], []
        incidence = [[] for _ in range(n)]
        longest = 1
        for ci, c in enumerate(constraints):
            prog = compile_ast(c.ast, self.index, [])
            cstart.append(len(ops))
            for op, arg in prog:
                ops.append(op)
                args.append(arg)
            cend.append(len(ops))
            longest = max(longest, len(prog))
            scope = sorted(self.index[name] for name in c.scope)
            scope_idx.extend(scope)
            scope_ptr.append(len(scope_idx))
            for x in scope:
                incidence[x].append(ci)
        self.ops = np.asarray(ops, dtype=np.int64)
        self.args = np.asarray(args, dtype=np.int64)
        self.cstart = np.asarray(cstart, dtype=np.int64)
        self.cend = np.asarray(cend, dtype=np.int64)
        self.scope_ptr = np.asarray(scope_ptr, dtype=np.int64)
        self.scope_idx = np.asarray(scope_idx, dtype=np.int64)
        self.vc_ptr = np.zeros(n + 1, dtype=np.int64)
        self.vc_ptr[1:] = np.cumsum([len(lst) for lst in incidence])
        self.vc_idx = np.asarray([c for lst in incidence for c in lst], dtype=np.int64)
        self.stack_size = longest
        self.trail_size = int(self.dsize.sum()) + 1
        self.ascending = np.tile(np.arange(maxd, dtype=np.int64), (n, 1))


class SearchState:
    """Mutable arrays for one resumable search."""

    def __init__(self, cm: CompiledModel, active, order=None):
        n, maxd = cm.vals.shape
        self.cm = cm
        self.active = np.asarray(active, dtype=np.bool_)
        self.order = cm.ascending if order is None else np.asarray(order, dtype=np.int64)
        self.alive = np.ones((n, maxd), dtype=np.int8)
        self.assigned = np.zeros(n, dtype=np.bool_)
        self.value = np.zeros(n, dtype=np.int64)
        self.choice = np.zeros(n, dtype=np.int64)
        self.seq = np.zeros(n, dtype=np.int64)
        self.trail_var = np.zeros(cm.trail_size, dtype=np.int64)
        self.trail_val = np.zeros(cm.trail_size, dtype=np.int64)
        self.mark = np.zeros(n + 1, dtype=np.int64)
        self.ctl = np.zeros(4, dtype=np.int64)
        self.sv = np.zeros(cm.stack_size, dtype=np.int64)
        self.sk = np.zeros(cm.stack_size, dtype=np.int64)
        init_search(cm.ops, cm.args, cm.cstart, cm.cend, cm.scope_ptr, cm.scope_idx, cm.vals,
                    cm.dsize, self.active, self.alive, self.assigned, self.value, self.choice,
                    self.seq, self.trail_var, self.trail_val, self.mark, self.ctl, self.sv, self.sk)

    @property
    def status(self):
        return int(self.ctl[STATUS])

    @property
    def nodes(self):
        return int(self.ctl[NODES])

    def advance(self, quota: int) -> int:
        cm = self.cm
        return int(run_search(cm.ops, cm.args, cm.cstart, cm.cend, cm.scope_ptr, cm.scope_idx,
                              cm.vc_ptr, cm.vc_idx, cm.vals, cm.dsize, self.order, self.active,
                              self.alive, self.assigned, self.value, self.choice, self.seq, self.trail_var,
                              self.trail_val, self.mark, self.ctl, self.sv, self.sk, quota))


@jit
def count_violations(ops, args, cstart, cend, active, value, sv, sk):
    """Number of active constraints false under the total assignment ``value``."""
    n = value.shape[0]
    assigned = np.ones(n, dtype=np.bool_)
    bad = 0
    for c in range(active.shape[0]):
        if active[c] and eval_program(ops, args, cstart[c], cend[c], assigned, value, sv, sk) == FALSE_:
            bad += 1
    return bad


@jit
def greedy_repair(ops, args, cstart, cend, vals, dsize, active, free, value, sv, sk):
    """One pass over ``free`` variables, each set to its least-violating value.

    ``value`` is modified in place; returns the final violation count.
    """
    for i in range(free.shape[0]):
        x = free[i]
        best = value[x]
        best_bad = count_violations(ops, args, cstart, cend, active, value, sv, sk)
        for j in range(dsize[x]):
            value[x] = vals[x, j]
            bad = count_violations(ops, args, cstart, cend, active, value, sv, sk)
            if bad < best_bad:
                best_bad = bad
                best = vals[x, j]
        value[x] = best
    return count_violations(ops, args, cstart, cend, active, value, sv, sk)
