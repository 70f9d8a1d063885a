"""Constraint expression language: AST, parser, printer and three-valued evaluation.

Grammar (lowest to highest precedence)::

    iff      := implies ('<->' implies)*
    implies  := or ('->' implies)?            # right associative
    or       := and ('or' and)*
    and      := not ('and' not)*
    not      := 'not' not | cmp
    cmp      := sum (('=='|'!='|'<'|'<='|'>'|'>=') sum)?
    sum      := unary (('+'|'-') unary)*
    unary    := '-' unary | primary
    primary  := INT | NAME | 'true' | 'false' | '(' iff ')'

A bare NAME that is not compared becomes a boolean atom and must name a
boolean variable.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"

KEYWORDS = frozenset({"and", "or", "not", "true", "false"})
COMPARATORS = ("==", "!=", "<=", ">=", "<", ">")


class ExpressionError(ValueError):
    """Raised for syntax, name and type errors in constraint text."""

    def __init__(self, message, position=None, token=None):
        self.position = position
        self.token = token
        if position is not None:
            message = f"{message} at position {position} (token {token!r})"
        super().__init__(message)


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Term"


@dataclass(frozen=True)
class Arith:
    op: str  # '+' or '-'
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Not:
    operand: "Formula"


@dataclass(frozen=True)
class Logic:
    op: str  # 'and', 'or', '->', '<->'
    left: "Formula"
    right: "Formula"


Term = Union[Const, Var, Neg, Arith]
Formula = Union[Compare, Atom, BoolConst, Not, Logic]

_TERM_TYPES = (Const, Var, Neg, Arith)


def conjoin(op: str, items) -> Formula:
    """Left-fold ``items`` with a logical operator; empty input gives the neutral constant."""
    items = list(items)
    if not items:
        return BoolConst(op == "and")
    out = items[0]
    for item in items[1:]:
        out = Logic(op, out, item)
    return out


def variables_of(node) -> frozenset:
    if isinstance(node, (Var, Atom)):
        return frozenset((node.name,))
    if isinstance(node, (Const, BoolConst)):
        return frozenset()
    if isinstance(node, (Neg, Not)):
        return variables_of(node.operand)
    return variables_of(node.left) | variables_of(node.right)


# --- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><->|->|==|!=|<=|>=|<|>|\+|-|\(|\)))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionError("unexpected character", pos, text[pos])
        start = m.start(m.lastgroup)
        if m.lastgroup == "int":
            tokens.append(("int", m.group("int"), start))
        elif m.lastgroup == "name":
            word = m.group("name")
            tokens.append(("kw" if word in KEYWORDS else "name", word, start))
        else:
            tokens.append(("op", m.group("op"), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


# --- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, text, domains):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.domains = domains

    def peek(self):
        return self.tokens[self.i]

    def accept(self, value):
        kind, tok, _ = self.tokens[self.i]
        if kind in ("op", "kw") and tok == value:
            self.i += 1
            return True
        return False

    def fail(self, message):
        _, tok, pos = self.peek()
        raise ExpressionError(message, pos, tok or "<end>")

    def parse(self):
        node = self.formula(self.iff())
        if self.peek()[0] != "eof":
            self.fail("unexpected token")
        return node

    def formula(self, node, pos=None):
        """Coerce a parsed node into a boolean formula."""
        if isinstance(node, Var):
            if self.domains is not None and not _is_boolean(self.domains[node.name]):
                raise ExpressionError(
                    f"integer variable {node.name!r} used as a boolean atom", pos, node.name)
            return Atom(node.name)
        if isinstance(node, _TERM_TYPES):
            if pos is None:
                pos = self.peek()[2]
            raise ExpressionError("integer expression used as a condition", pos, self.peek()[1])
        return node

    def term(self, node, pos):
        if not isinstance(node, _TERM_TYPES):
            raise ExpressionError("boolean expression used as an integer term", pos, self.tokens[self.i - 1][1])
        return node

    def iff(self):
        left = self.implies()
        while True:
            pos = self.peek()[2]
            if not self.accept("<->"):
                return left
            left = Logic("<->", self.formula(left, pos), self.formula(self.implies(), pos))

    def implies(self):
        left = self.or_()
        pos = self.peek()[2]
        if self.accept("->"):
            return Logic("->", self.formula(left, pos), self.formula(self.implies(), pos))
        return left

    def or_(self):
        left = self.and_()
        while True:
            pos = self.peek()[2]
            if not self.accept("or"):
                return left
            left = Logic("or", self.formula(left, pos), self.formula(self.and_(), pos))

    def and_(self):
        left = self.not_()
        while True:
            pos = self.peek()[2]
            if not self.accept("and"):
                return left
            left = Logic("and", self.formula(left, pos), self.formula(self.not_(), pos))

    def not_(self):
        pos = self.peek()[2]
        if self.accept("not"):
            return Not(self.formula(self.not_(), pos))
        return self.cmp()

    def cmp(self):
        pos = self.peek()[2]
        left = self.sum_()
        kind, tok, opos = self.peek()
        if kind == "op" and tok in COMPARATORS:
            self.i += 1
            right = self.sum_()
            node = Compare(tok, self.term(left, pos), self.term(right, opos))
            kind2, tok2, _ = self.peek()
            if kind2 == "op" and tok2 in COMPARATORS:
                self.fail("comparisons are non-associative")
            return node
        return left

    def sum_(self):
        pos = self.peek()[2]
        left = self.unary()
        while True:
            kind, tok, opos = self.peek()
            if kind == "op" and tok in ("+", "-"):
                self.i += 1
                right = self.unary()
                left = Arith(tok, self.term(left, pos), self.term(right, opos))
            else:
                return left

    def unary(self):
        kind, tok, pos = self.peek()
        if kind == "op" and tok == "-":
            self.i += 1
            nkind, ntok, _ = self.peek()
            if nkind == "int":
                self.i += 1
                return Const(-int(ntok))
            return Neg(self.term(self.unary(), pos))
        return self.primary()

    def primary(self):
        kind, tok, pos = self.peek()
        if kind == "int":
            self.i += 1
            return Const(int(tok))
        if kind == "name":
            self.i += 1
            if self.domains is not None and tok not in self.domains:
                raise ExpressionError(f"unknown variable {tok!r}", pos, tok)
            return Var(tok)
        if kind == "kw" and tok in ("true", "false"):
            self.i += 1
            return BoolConst(tok == "true")
        if self.accept("("):
            node = self.iff()
            if not self.accept(")"):
                self.fail("expected ')'")
            return node
        self.fail("unexpected token")


def _is_boolean(values) -> bool:
    return set(values) <= {0, 1}


def parse(text: str, domains: Mapping[str, object] | None = None) -> Formula:
    """Parse constraint text into a formula AST.

    ``domains`` maps variable names to their value collections. When given,
    unknown names and boolean atoms over non-boolean variables are rejected.
    """
    if not text or not text.strip():
        raise ExpressionError("empty expression")
    return _Parser(text, domains).parse()


# --- printer ---------------------------------------------------------------

_LOGIC_PREC = {"<->": 1, "->": 2, "or": 3, "and": 4}


def _prec(node) -> int:
    if isinstance(node, Logic):
        return _LOGIC_PREC[node.op]
    if isinstance(node, Not):
        return 5
    return 6


def _term_str(node) -> str:
    if isinstance(node, Const):
        return str(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = node.operand
        if isinstance(inner, (Var, Neg)):
            return f"-{_term_str(inner)}"
        return f"-({_term_str(inner)})"
    left = _term_str(node.left)
    right = _term_str(node.right)
    if isinstance(node.right, Arith):
        right = f"({right})"
    return f"{left} {node.op} {right}"


def to_text(node) -> str:
    """Render an AST so that ``parse(to_text(node)) == node``."""
    if isinstance(node, _TERM_TYPES):
        return _term_str(node)
    if isinstance(node, Compare):
        return f"{_term_str(node.left)} {node.op} {_term_str(node.right)}"
    if isinstance(node, Atom):
        return node.name
    if isinstance(node, BoolConst):
        return "true" if node.value else "false"
    if isinstance(node, Not):
        inner = to_text(node.operand)
        return f"not {inner}" if _prec(node.operand) >= 5 else f"not ({inner})"
    prec = _LOGIC_PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    lp, rp = _prec(node.left), _prec(node.right)
    if node.op == "->":
        left_paren, right_paren = lp <= prec, rp < prec
    else:
        left_paren, right_paren = lp < prec, rp <= prec
    if left_paren:
        left = f"({left})"
    if right_paren:
        right = f"({right})"
    return f"{left} {node.op} {right}"


# --- evaluation ------------------------------------------------------------

def _term_value(node, asg):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return asg.get(node.name)
    if isinstance(node, Neg):
        v = _term_value(node.operand, asg)
        return None if v is None else -v
    a = _term_value(node.left, asg)
    b = _term_value(node.right, asg)
    if a is None or b is None:
        return None
    return a + b if node.op == "+" else a - b


_CMP = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def truth(node, asg: Mapping[str, int]):
    """Kleene truth value of ``node``: True, False or None (undetermined)."""
    if isinstance(node, Compare):
        a = _term_value(node.left, asg)
        b = _term_value(node.right, asg)
        if a is None or b is None:
            return None
        return _CMP[node.op](a, b)
    if isinstance(node, Atom):
        v = asg.get(node.name)
        return None if v is None else v != 0
    if isinstance(node, BoolConst):
        return node.value
    if isinstance(node, Not):
        v = truth(node.operand, asg)
        return None if v is None else not v
    a = truth(node.left, asg)
    b = truth(node.right, asg)
    op = node.op
    if op == "->":
        a = None if a is None else not a
        op = "or"
    if op == "and":
        if a is False or b is False:
            return False
        return None if a is None or b is None else True
    if op == "or":
        if a is True or b is True:
            return True
        return None if a is None or b is None else False
    # <->
    return None if a is None or b is None else a == b


def evaluate(node, asg: Mapping[str, int]) -> str:
    """Three-valued evaluation returning ``SAT``, ``UNSAT`` or ``UNKNOWN``.

    Accepts an AST or any constraint object carrying one in ``.ast``.
    """
    v = truth(getattr(node, "ast", node), asg)
    if v is None:
        return UNKNOWN
    return SAT if v else UNSAT
