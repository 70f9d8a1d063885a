"""Feature models: SXFM subset, translation to constraints, random generation
and the configuration / requirement material used by the benchmarks.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .expr import Atom, Compare, Const, Logic, Not, Var, conjoin
from .task import (AssignmentConstraint, ConfigurationTask, ConstraintExpr, Domain,
                   ReconfigurationTask, Variable)
from .engine import ConstraintModel

MANDATORY = "mandatory"
OPTIONAL = "optional"
GROUPED = "grouped"
ROOT = "root"
OR = "or"
ALTERNATIVE = "alternative"


class FeatureModelError(ValueError):
    pass


class GenerationFailed(RuntimeError):
    pass


class UnsatisfiableModel(ValueError):
    pass


class NoAlternativeSolution(ValueError):
    pass


@dataclass
class Feature:
    id: str
    name: str
    parent: str | None
    relation: str  # root / mandatory / optional / grouped
    group: str | None = None


@dataclass
class Group:
    id: str
    parent: str
    kind: str  # or / alternative
    members: list = field(default_factory=list)

    @property
    def cardinality(self):
        return (1, 1) if self.kind == ALTERNATIVE else (1, len(self.members))


@dataclass
class FeatureModel:
    """Feature tree plus clause-form cross-tree constraints.

    ``features`` keeps pre-order (parents before children). Each CTC is a
    ``(name, literals)`` pair with literals ``(feature_id, positive)``.
    """

    name: str
    features: dict = field(default_factory=dict)
    groups: dict = field(default_factory=dict)
    ctcs: list = field(default_factory=list)

    @property
    def root(self) -> str:
        return next(iter(self.features))

    def children(self, fid):
        return [f for f in self.features.values() if f.parent == fid]

    def ancestors(self, fid):
        out = []
        p = self.features[fid].parent
        while p is not None:
            out.append(p)
            p = self.features[p].parent
        return out

    def validate(self):
        roots = [f for f in self.features.values() if f.parent is None]
        if len(roots) != 1:
            raise FeatureModelError(f"feature model needs exactly one root, found {len(roots)}")
        for f in self.features.values():
            if f.parent is not None and f.parent not in self.features:
                raise FeatureModelError(f"feature {f.id!r} has unknown parent {f.parent!r}")
            if f.relation == GROUPED and (f.group not in self.groups
                                          or f.id not in self.groups[f.group].members):
                raise FeatureModelError(f"grouped feature {f.id!r} has no group")
        for g in self.groups.values():
            for mid in g.members:
                if self.features[mid].group != g.id or self.features[mid].parent != g.parent:
                    raise FeatureModelError(f"group {g.id!r} member {mid!r} is inconsistent")
        for name, lits in self.ctcs:
            for fid, _ in lits:
                if fid not in self.features:
                    raise FeatureModelError(f"constraint {name!r} names unknown feature {fid!r}")
        return self


# --- SXFM --------------------------------------------------------------------

_TREE_LINE = re.compile(
    r"^:(?P<tag>[rmog]?)\s*(?P<name>[^()\[\]]*?)\s*(?:\((?P<id>[^)]+)\))?\s*"
    r"(?:\[(?P<lo>\d+)\s*(?:,|\.\.)\s*(?P<hi>\d+|\*)\])?\s*$"
)
_SECTION = re.compile(r"<(feature_tree|constraints)>(.*?)</\1>", re.S)


def _slug(name):
    s = re.sub(r"\W+", "_", name.strip()).strip("_")
    return s or "f"


def parse_sxfm(document: bytes | str) -> FeatureModel:
    """Parse the SPLOT SXFM feature-tree and constraints sections.

    Indentation must use tabs, one per tree level. Groups accept the
    cardinalities [1,1] (alternative) and [1,*] (or).
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    m = re.search(r'<feature_model[^>]*name="([^"]*)"', document)
    fm = FeatureModel(m.group(1) if m else "model")
    sections = {name: body for name, body in _SECTION.findall(document)}
    if "feature_tree" not in sections:
        raise FeatureModelError("missing <feature_tree> section")

    stack = []  # (depth, feature id or None, group id or None)
    auto = 0
    for lineno, raw in enumerate(sections["feature_tree"].splitlines(), 1):
        if not raw.strip():
            continue
        stripped = raw.lstrip("\t")
        depth = len(raw) - len(stripped)
        if stripped[:1].isspace():
            raise FeatureModelError(f"line {lineno}: malformed indentation (tabs only)")
        mt = _TREE_LINE.match(stripped.rstrip())
        if mt is None:
            raise FeatureModelError(f"line {lineno}: cannot parse {stripped.strip()!r}")
        tag = mt.group("tag")
        while stack and stack[-1][0] >= depth:
            stack.pop()
        if not stack and depth != 0:
            raise FeatureModelError(f"line {lineno}: malformed tree indentation")
        if stack and depth != stack[-1][0] + 1:
            raise FeatureModelError(f"line {lineno}: malformed tree indentation (level jump)")
        if tag == "r":
            if stack or fm.features:
                raise FeatureModelError(f"line {lineno}: second root")
        elif not stack:
            raise FeatureModelError(f"line {lineno}: feature outside the root")
        fid = mt.group("id")
        if tag == "g":
            lo, hi = mt.group("lo"), mt.group("hi")
            if lo is None:
                raise FeatureModelError(f"line {lineno}: group without cardinality")
            if (lo, hi) == ("1", "1"):
                kind = ALTERNATIVE
            elif lo == "1" and hi == "*":
                kind = OR
            else:
                raise FeatureModelError(f"line {lineno}: unsupported group cardinality [{lo},{hi}]")
            parent = stack[-1][1]
            if parent is None:
                raise FeatureModelError(f"line {lineno}: group directly under a group")
            auto += 1
            gid = fid or f"_g{auto}"
            fm.groups[gid] = Group(gid, parent, kind)
            stack.append((depth, None, gid))
            continue
        name = mt.group("name") or fid
        if not name:
            raise FeatureModelError(f"line {lineno}: feature without name or id")
        fid = fid or _slug(name)
        if fid in fm.features:
            raise FeatureModelError(f"line {lineno}: duplicate feature id {fid!r}")
        if tag == "r":
            feat = Feature(fid, name, None, ROOT)
        else:
            parent_fid, parent_gid = stack[-1][1], stack[-1][2]
            if parent_gid is not None:
                if tag:
                    raise FeatureModelError(f"line {lineno}: group member must use ':' marker")
                g = fm.groups[parent_gid]
                feat = Feature(fid, name, g.parent, GROUPED, parent_gid)
                g.members.append(fid)
            else:
                if tag not in ("m", "o"):
                    raise FeatureModelError(f"line {lineno}: expected :m or :o under a feature")
                feat = Feature(fid, name, parent_fid, MANDATORY if tag == "m" else OPTIONAL)
        fm.features[fid] = feat
        stack.append((depth, fid, None))

    for gid, g in fm.groups.items():
        if not g.members:
            raise FeatureModelError(f"group {gid!r} has no members")

    for raw in sections.get("constraints", "").splitlines():
        line = raw.strip()
        if not line:
            continue
        name, sep, body = line.partition(":")
        if not sep:
            raise FeatureModelError(f"constraint line without name: {line!r}")
        lits = []
        for lit in re.split(r"\s+or\s+", body.strip()):
            lit = lit.strip()
            positive = not lit.startswith("~")
            fid = lit.lstrip("~").strip()
            if " and " in f" {lit} ":
                raise FeatureModelError(f"constraint {name!r} is not a clause")
            lits.append((fid, positive))
        fm.ctcs.append((name.strip(), lits))
    return fm.validate()


def write_sxfm(fm: FeatureModel) -> str:
    out = [f'<feature_model name="{fm.name}">', "<feature_tree>"]

    def emit(fid, depth):
        f = fm.features[fid]
        tag = {ROOT: ":r", MANDATORY: ":m", OPTIONAL: ":o", GROUPED: ":"}[f.relation]
        out.append("\t" * depth + f"{tag} {f.name} ({f.id})")
        kids = [c for c in fm.children(fid) if c.relation != GROUPED]
        for c in kids:
            emit(c.id, depth + 1)
        for g in fm.groups.values():
            if g.parent == fid:
                card = "[1,1]" if g.kind == ALTERNATIVE else "[1,*]"
                out.append("\t" * (depth + 1) + f":g ({g.id}) {card}")
                for mid in g.members:
                    emit(mid, depth + 2)

    emit(fm.root, 0)
    out += ["</feature_tree>", "<constraints>"]
    for name, lits in fm.ctcs:
        out.append(f"{name}:" + " or ".join(("" if pos else "~") + fid for fid, pos in lits))
    out += ["</constraints>", "</feature_model>"]
    return "\n".join(out) + "\n"


# --- translation -------------------------------------------------------------

def _lit(fid, positive=True):
    return Atom(fid) if positive else Not(Atom(fid))


def fm_to_csp(fm: FeatureModel) -> ConfigurationTask:
    """One boolean variable per feature; tree and cross-tree semantics as constraints."""
    variables = [Variable(fid, Domain.boolean()) for fid in fm.features]
    kb = []

    def add(ast):
        kb.append(ConstraintExpr.from_ast(f"c{len(kb) + 1}", ast))

    add(Compare("==", Var(fm.root), Const(1)))
    for f in fm.features.values():
        if f.relation == MANDATORY:
            add(Logic("<->", Atom(f.id), Atom(f.parent)))
        elif f.relation == OPTIONAL:
            add(Logic("->", Atom(f.id), Atom(f.parent)))
    for g in fm.groups.values():
        members = [Atom(mid) for mid in g.members]
        for a in members:
            add(Logic("->", a, Atom(g.parent)))
        if g.kind == OR:
            add(Logic("<->", Atom(g.parent), conjoin("or", members)))
        else:
            add(Logic("->", Atom(g.parent), conjoin("or", members)))
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    add(Not(Logic("and", members[i], members[j])))
    for _, lits in fm.ctcs:
        add(conjoin("or", [_lit(fid, pos) for fid, pos in lits]))
    return ConfigurationTask(variables, kb, [])


def is_valid_configuration(fm: FeatureModel, selected) -> bool:
    """Check a feature selection directly against the tree and CTC semantics."""
    selected = set(selected)
    if fm.root not in selected:
        return False
    for f in fm.features.values():
        on = f.id in selected
        if f.parent is not None and on and f.parent not in selected:
            return False
        if f.relation == MANDATORY and f.parent in selected and not on:
            return False
    for g in fm.groups.values():
        if g.parent in selected:
            count = sum(1 for mid in g.members if mid in selected)
            lo, hi = g.cardinality
            if not lo <= count <= hi:
                return False
    for _, lits in fm.ctcs:
        if not any((fid in selected) == pos for fid, pos in lits):
            return False
    return True


# --- random generation ---------------------------------------------------------

@dataclass
class GenerationParams:
    num_features: int
    ctc_fraction: float = 0.1
    max_children: int = 4
    p_mandatory: float = 0.25
    p_optional: float = 0.25
    p_or: float = 0.25
    p_alternative: float = 0.25
    seed: int = 0
    max_retries: int = 200

    def __post_init__(self):
        probs = (self.p_mandatory, self.p_optional, self.p_or, self.p_alternative)
        if any(p < 0 for p in probs) or not math.isclose(sum(probs), 1.0, abs_tol=1e-9):
            raise ValueError("branch-type probabilities must be non-negative and sum to 1")
        if not 0.0 <= self.ctc_fraction <= 1.0:
            raise ValueError("ctc_fraction must lie in [0, 1]")
        if self.num_features < 2:
            raise ValueError("num_features must be at least 2")
        if self.max_children < 1:
            raise ValueError("max_children must be at least 1")


def _csp_model(fm, extra=()):
    task = fm_to_csp(fm)
    return task, ConstraintModel(task.variables, task.kb + list(extra))


def _satisfiable(fm):
    task, model = _csp_model(fm)
    return model.is_consistent([c.id for c in task.kb])


def generate_random_fm(params: GenerationParams) -> FeatureModel:
    """Seeded top-down tree growth followed by random requires/excludes CTCs.

    Every parent draws a child count uniform in ``[1, max_children]`` and one
    branch type; or/alternative needs at least two children and otherwise
    falls back to individual mandatory/optional children. CTCs join pairs of
    features that are not ancestors of one another and are redrawn when they
    would void the model.
    """
    rng = np.random.default_rng(params.seed)
    fm = FeatureModel(f"random_{params.num_features}_{params.seed}")
    fm.features["f0"] = Feature("f0", "f0", None, ROOT)
    frontier = ["f0"]
    count = 1
    probs = np.array([params.p_mandatory, params.p_optional, params.p_or, params.p_alternative])
    single = probs[:2] / probs[:2].sum() if probs[:2].sum() > 0 else np.array([0.5, 0.5])
    head = 0
    while count < params.num_features:
        parent = frontier[head]
        head += 1
        k = int(rng.integers(1, params.max_children + 1))
        k = min(k, params.num_features - count)
        kind = ("mandatory", "optional", OR, ALTERNATIVE)[int(rng.choice(4, p=probs))]
        kids = []
        for _ in range(k):
            fid = f"f{count}"
            count += 1
            kids.append(fid)
        if kind in (OR, ALTERNATIVE) and k >= 2:
            gid = f"g{len(fm.groups) + 1}"
            fm.groups[gid] = Group(gid, parent, kind, list(kids))
            for fid in kids:
                fm.features[fid] = Feature(fid, fid, parent, GROUPED, gid)
        else:
            for fid in kids:
                if kind == "mandatory":
                    rel = MANDATORY
                elif kind == "optional":
                    rel = OPTIONAL
                else:
                    rel = MANDATORY if rng.random() < single[0] else OPTIONAL
                fm.features[fid] = Feature(fid, fid, parent, rel)
        frontier.extend(kids)

    target = round(params.ctc_fraction * params.num_features)
    ids = list(fm.features)
    anc = {fid: set(fm.ancestors(fid)) for fid in ids}
    pairs = None  # explicit candidate list, built only if rejection sampling keeps missing
    misses = retries = 0
    while len(fm.ctcs) < target:
        if pairs is None:
            a, b = (ids[int(i)] for i in rng.choice(len(ids), size=2, replace=False))
            if a in anc[b] or b in anc[a]:
                misses += 1
                if misses > 1000:
                    pairs = [(x, y) for i, x in enumerate(ids) for y in ids[i + 1:]
                             if x not in anc[y] and y not in anc[x]]
                    if not pairs:
                        raise GenerationFailed("every feature pair is related by ancestry")
                continue
        else:
            a, b = pairs[int(rng.integers(len(pairs)))]
        if rng.random() < 0.5:
            lits = [(a, False), (b, True)]  # a requires b
        else:
            lits = [(a, False), (b, False)]  # a excludes b
        fm.ctcs.append((f"ctc{len(fm.ctcs) + 1}", lits))
        if not _satisfiable(fm):
            fm.ctcs.pop()
            retries += 1
            if retries > params.max_retries:
                raise GenerationFailed(
                    f"could not place {target} cross-tree constraints without voiding the model")
    return fm.validate()


# --- configurations and requirements -------------------------------------------

def _random_value_order(variables, rng):
    return {v.name: [v.domain.values[i] for i in rng.permutation(len(v.domain))] for v in variables}


def sample_configuration(fm: FeatureModel, seed: int) -> dict:
    """A valid configuration found with a seed-shuffled value order."""
    task, model = _csp_model(fm)
    rng = np.random.default_rng(seed)
    sol = model.solve([c.id for c in task.kb], value_order=_random_value_order(task.variables, rng))
    if sol is None:
        raise UnsatisfiableModel("feature model has no valid configuration")
    return sol.assignment


def generate_reconfig_requirements(fm: FeatureModel, S: dict, fraction: float, seed: int) -> list:
    """New requirements ``v == S2(v)`` projected from a second valid configuration.

    ``S2`` differs from ``S`` and is found with a seed-shuffled value order;
    ``ceil(fraction * |V|)`` variables are selected, always including at least
    one on which ``S2`` and ``S`` disagree so that a reconfiguration is needed.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    differ = ConstraintExpr.from_ast(
        "_differ", conjoin("or", [Compare("!=", Var(v), Const(a)) for v, a in S.items()]))
    task, model = _csp_model(fm, [differ])
    rng = np.random.default_rng(seed)
    sol = model.solve([c.id for c in task.kb] + ["_differ"],
                      value_order=_random_value_order(task.variables, rng))
    if sol is None:
        raise NoAlternativeSolution("the model has a single valid configuration")
    S2 = sol.assignment
    names = [v.name for v in task.variables]
    count = min(len(names), math.ceil(fraction * len(names) - 1e-9))
    diff = [n for n in names if S2[n] != S[n]]
    first = diff[int(rng.integers(len(diff)))]
    rest = [n for n in names if n != first]
    picked = {first} | {rest[int(i)] for i in rng.choice(len(rest), size=count - 1, replace=False)}
    return [ConstraintExpr.from_ast(f"r{i + 1}", Compare("==", Var(n), Const(S2[n])))
            for i, n in enumerate(n for n in names if n in picked)]


def reconfiguration_task(fm: FeatureModel, S: dict, requirements, ordering=None) -> ReconfigurationTask:
    task = fm_to_csp(fm)
    solution = [AssignmentConstraint(f"s{i + 1}", v.name, int(S[v.name]))
                for i, v in enumerate(task.variables)]
    return ReconfigurationTask(task.variables, task.kb, solution, list(requirements), ordering)
