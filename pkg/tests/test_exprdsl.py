import math

import pytest
from hypothesis import given, settings, strategies as st

from gaussmaps import exprdsl
from gaussmaps.exprdsl import (
    BinOp, Call, Neg, Num, ParseError, EvalError, Pi, Var,
    eval_dual, eval_number, free_variables, parse, to_text,
)


def test_simple_values():
    # one ulp of slack: 1.0/sqrt(2.0) rounds to ...475, the exact value to ...476
    assert eval_number(parse("cos(u1)/sqrt(2)"), {"u1": 0.0}) == pytest.approx(
        0.7071067811865476, abs=2e-16)
    assert eval_number(parse("2+3*4"), {}) == 14.0
    assert eval_number(parse("pi"), {}) == 3.141592653589793


def test_precedence_and_associativity():
    assert eval_number(parse("2^3^2"), {}) == 512.0          # right-assoc
    assert eval_number(parse("-2^2"), {}) == -4.0            # ^ over unary -
    assert eval_number(parse("2^-2"), {}) == 0.25
    assert eval_number(parse("1-2-3"), {}) == -4.0           # left-assoc
    assert eval_number(parse("8/4/2"), {}) == 1.0
    assert eval_number(parse("1+2*3^2"), {}) == 19.0


def test_unclosed_paren_reports_offset():
    with pytest.raises(ParseError) as err:
        parse("sin(u1")
    assert err.value.offset == 7
    assert "')'" in str(err.value)


def test_unknown_identifier():
    with pytest.raises(ParseError, match="unknown identifier"):
        parse("u1 + bogus")
    with pytest.raises(ParseError, match="unknown function"):
        parse("frob(u1)")


def test_syntax_errors():
    with pytest.raises(ParseError):
        parse("2 +")
    with pytest.raises(ParseError):
        parse("(1+2))")
    with pytest.raises(ParseError):
        parse("1 2")


def test_eval_errors_carry_offset():
    with pytest.raises(EvalError, match="offset"):
        eval_number(parse("log(0-1)"), {})
    with pytest.raises(EvalError, match="sqrt"):
        eval_number(parse("sqrt(0-2)"), {})
    with pytest.raises(EvalError, match="unbound"):
        eval_number(parse("u3"), {"u1": 1.0})
    with pytest.raises(EvalError, match="division"):
        eval_number(parse("1/(2-2)"), {})


def test_free_variables():
    assert free_variables(parse("sin(u1)*u2 + t")) == {"u1", "u2", "t"}
    assert free_variables(parse("pi + 3")) == set()


def test_eval_dual_square():
    val, dot = eval_dual(parse("u1^2"), {"u1": 3.0}, {"u1": 1.0})
    assert val == 9.0
    assert dot == 6.0


def test_eval_dual_mixed_direction():
    ast = parse("u1*u2 + sin(u2)")
    val, dot = eval_dual(ast, {"u1": 2.0, "u2": 0.5}, {"u1": 1.0, "u2": 2.0})
    # d/ds (u1+s)(u2+2s) + sin(u2+2s) = u2 + 2*u1 + 2*cos(u2)
    assert val == pytest.approx(2 * 0.5 + math.sin(0.5))
    assert dot == pytest.approx(0.5 + 4.0 + 2 * math.cos(0.5))


EXPR_TEXTS = [
    "sin(u1)*cos(u2) + u1^3/(1+u2^2)",
    "exp(0.3*u1) - sinh(u2)*cosh(u1)",
    "atan(u1*u2) + sqrt(4+u1^2)",
    "tan(u1/4) + log(2+u2)",
    "-u1^2 + (u1+u2)^3 - 2^u1",
]


@pytest.mark.parametrize("text", EXPR_TEXTS)
def test_eval_dual_matches_central_differences(text):
    ast = parse(text)
    base = {"u1": 0.7, "u2": -0.3}
    h = 1e-6
    for name in ("u1", "u2"):
        _, dot = eval_dual(ast, base, {name: 1.0})
        hi = dict(base)
        lo = dict(base)
        hi[name] += h
        lo[name] -= h
        fd = (eval_number(ast, hi) - eval_number(ast, lo)) / (2 * h)
        assert dot == pytest.approx(fd, abs=1e-9, rel=1e-9)


# -- property tests ----------------------------------------------------------

_leaves = st.one_of(
    st.builds(Num, st.floats(min_value=0.001, max_value=9.0).map(lambda s: round(s, 3))),
    st.builds(Var, st.sampled_from(["u1", "u2", "t"])),
    st.just(Pi()),
)


def _trees(children):
    return st.one_of(
        st.builds(lambda a: Neg(a), children),
        st.builds(lambda f, a: Call(f, a), st.sampled_from(sorted(exprdsl.FUNCTIONS)), children),
        st.builds(lambda op, a, b: BinOp(op, a, b),
                  st.sampled_from(["+", "-", "*", "/", "^"]), children, children),
    )


ast_strategy = st.recursive(_leaves, _trees, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(ast_strategy)
def test_print_parse_roundtrip(ast):
    text = to_text(ast)
    reparsed = parse(text)
    assert to_text(reparsed) == text
    # and a second round trip is stable
    assert to_text(parse(to_text(reparsed))) == text


@settings(max_examples=100, deadline=None)
@given(ast_strategy)
def test_reparsed_tree_evaluates_identically(ast):
    bindings = {"u1": 0.37, "u2": 1.21, "t": 0.11}
    try:
        expected = eval_number(ast, bindings)
    except (EvalError, OverflowError):
        return
    if not math.isfinite(expected):
        return
    got = eval_number(parse(to_text(ast)), bindings)
    assert got == pytest.approx(expected, rel=1e-12, abs=1e-12)
