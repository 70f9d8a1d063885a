import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flexdiag.expr import (SAT, UNKNOWN, UNSAT, Arith, Atom, BoolConst, Compare, Const, ExpressionError,
                           Logic, Neg, Not, Var, evaluate, parse, to_text, truth, variables_of)
from flexdiag.task import load_task_file
from conftest import data_path
from oracles import truth_table

INT_DOMAINS = {"x": (0, 1, 2), "y": (0, 1, 2), "z": (1, 2, 3)}
BOOL_DOMAINS = {"a": (0, 1), "b": (0, 1)}
DOMAINS = {**INT_DOMAINS, **BOOL_DOMAINS}
CONTAINER = {n: (1, 2, 3) for n in ("pc", "games", "paper", "fuel", "fireworks", "oil", "roof", "pipes")}


def test_parse_container_constraint():
    assert parse("fireworks != fuel", CONTAINER) == Compare("!=", Var("fireworks"), Var("fuel"))


def test_parse_requirement():
    assert parse("pc == games", CONTAINER) == Compare("==", Var("pc"), Var("games"))


def test_parse_not_and():
    assert parse("not (a and b)", BOOL_DOMAINS) == Not(Logic("and", Atom("a"), Atom("b")))


def test_precedence_chain():
    ast = parse("a or b and not a -> b <-> a", BOOL_DOMAINS)
    expected = Logic("<->", Logic("->", Logic("or", Atom("a"), Logic("and", Atom("b"), Not(Atom("a")))),
                                  Atom("b")), Atom("a"))
    assert ast == expected


def test_implication_is_right_associative():
    assert parse("a -> b -> a", BOOL_DOMAINS) == Logic("->", Atom("a"), Logic("->", Atom("b"), Atom("a")))


def test_arithmetic_terms():
    assert parse("x + 1 - y >= -2", DOMAINS) == Compare(
        ">=", Arith("-", Arith("+", Var("x"), Const(1)), Var("y")), Const(-2))


@pytest.mark.parametrize("text", ["x < y < z", "x == y == z"])
def test_comparisons_do_not_chain(text):
    with pytest.raises(ExpressionError):
        parse(text, DOMAINS)


def test_syntax_error_reports_position_and_token():
    with pytest.raises(ExpressionError) as info:
        parse("x == (y", DOMAINS)
    assert info.value.position is not None
    with pytest.raises(ExpressionError) as info:
        parse("x == y )", DOMAINS)
    assert info.value.token == ")"


def test_unknown_variable():
    with pytest.raises(ExpressionError, match="unknown"):
        parse("w == 1", DOMAINS)


def test_boolean_atom_on_integer_variable():
    with pytest.raises(ExpressionError):
        parse("x and a", DOMAINS)


@pytest.mark.parametrize("text", ["", "   ", "x +", "and a", "x == 1 or", "x = 1", "x == 1 $"])
def test_malformed(text):
    with pytest.raises(ExpressionError):
        parse(text, DOMAINS)


def test_evaluate_examples():
    task = load_task_file(data_path("container.json"))
    c = task.by_id()
    assert evaluate(c["c1"], {"fireworks": 1, "fuel": 3}) == SAT
    assert evaluate(c["c4"], {"pipes": 1}) == UNKNOWN
    assert evaluate(c["r1p"], {"pc": 3, "games": 1}) == UNSAT


def test_kleene_short_circuit():
    ast = parse("a or x == 1", DOMAINS)
    assert truth(ast, {"a": 1}) is True
    assert truth(ast, {"a": 0}) is None
    assert truth(parse("a and x == 1", DOMAINS), {"a": 0}) is False
    assert truth(parse("a -> x == 1", DOMAINS), {"a": 0}) is True
    assert truth(parse("a <-> x == 1", DOMAINS), {"a": 0}) is None


# --- generated expressions ---------------------------------------------------

consts = st.integers(-4, 4).map(Const)
int_vars = st.sampled_from(sorted(INT_DOMAINS)).map(Var)
terms = st.recursive(
    st.one_of(consts, int_vars),
    lambda t: st.one_of(st.builds(Neg, t), st.builds(Arith, st.sampled_from(["+", "-"]), t, t)),
    max_leaves=4,
)
comparisons = st.builds(Compare, st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), terms, terms)
atoms = st.sampled_from(sorted(BOOL_DOMAINS)).map(Atom)
formulas = st.recursive(
    st.one_of(comparisons, atoms, st.booleans().map(BoolConst)),
    lambda f: st.one_of(st.builds(Not, f),
                        st.builds(Logic, st.sampled_from(["and", "or", "->", "<->"]), f, f)),
    max_leaves=6,
)


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_round_trip(ast):
    assert parse(to_text(ast), DOMAINS) == ast


@settings(max_examples=200, deadline=None)
@given(formulas, st.data())
def test_monotone_under_extension(ast, data):
    names = sorted(variables_of(ast))
    full = {n: data.draw(st.sampled_from(DOMAINS[n])) for n in names}
    keep = data.draw(st.lists(st.booleans(), min_size=len(names), max_size=len(names)))
    partial = {n: full[n] for n, k in zip(names, keep) if k}
    first = evaluate(ast, partial)
    if first != UNKNOWN:
        middle = dict(partial)
        for n in names:
            if data.draw(st.booleans()):
                middle[n] = full[n]
        assert evaluate(ast, middle) == first
        assert evaluate(ast, full) == first


@settings(max_examples=150, deadline=None)
@given(formulas)
def test_full_assignments_match_truth_table(ast):
    names = sorted(variables_of(ast))
    table = truth_table(ast, names, DOMAINS)
    for combo in itertools.product(*(DOMAINS[n] for n in names)):
        got = evaluate(ast, dict(zip(names, combo)))
        assert got != UNKNOWN
        assert (got == SAT) == table[combo]
