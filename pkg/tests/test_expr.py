import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsgronwall.errors import EvaluationError, ExpressionSyntaxError, UnknownIdentifier
from tsgronwall.expr import BinOp, Call, Expression, Neg, Num, Var, evaluate, parse_expression, to_source


@pytest.mark.parametrize("src, env, expected", [
    ("1 + 2*3", {}, 7),
    ("exp(-(s+t))", {"s": 0, "t": 0}, 1),
    ("2^3^2", {}, 512),
    ("-2^2", {}, -4),
    ("(-2)^2", {}, 4),
    ("2^-1", {}, 0.5),
    ("10 - 4 - 3", {}, 3),
    ("12 / 3 / 2", {}, 2),
    ("min(x, 3, y) + max(1, 2)", {"x": 5, "y": 4}, 5),
    ("abs(-x) * cos(0) + sin(0)", {"x": 1.5}, 1.5),
    ("1.5e1 + .5", {}, 15.5),
    ("--x", {"x": 2}, 2),
])
def test_evaluates(src, env, expected):
    assert float(Expression(src)(**env)) == expected


def test_precedence_tree_shape():
    assert parse_expression("2^3^2") == BinOp("^", Num(2), BinOp("^", Num(3), Num(2)))
    assert parse_expression("-x^2") == Neg(BinOp("^", Var("x"), Num(2)))
    assert parse_expression("x - y - z") == BinOp(
        "-", BinOp("-", Var("x"), Var("y")), Var("z"))


@pytest.mark.parametrize("src, offset", [
    ("1 +", 3),
    ("(1 + 2", 6),
    ("1 $ 2", 2),
    ("sin()", 4),
    ("2 3", 2),
    ("sin(1, 2)", 0),
    ("min(1)", 0),
    ("1e999", 0),
])
def test_syntax_errors_carry_offsets(src, offset):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression(src)
    assert info.value.offset == offset


def test_offset_is_in_bytes():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("1 + é")
    assert info.value.offset == 4
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("éé $")
    assert info.value.offset == 0


def test_unknown_identifier_is_a_parse_error():
    with pytest.raises(UnknownIdentifier) as info:
        parse_expression("x + foo(2)")
    assert info.value.name == "foo"
    assert info.value.offset == 4


@pytest.mark.parametrize("src, env", [
    ("1 / x", {"x": 0}),
    ("x ^ -1", {"x": 0}),
    ("exp(x)", {"x": 1000}),
    ("x ^ 0.5", {"x": -1}),
    ("s + 1", {"x": 0}),
])
def test_evaluation_errors(src, env):
    with pytest.raises(EvaluationError):
        Expression(src)(**env)


def test_vectorised_evaluation():
    x = np.array([0.0, 1.0, 2.0])
    np.testing.assert_array_equal(Expression("x^2 + 1")(x=x), [1, 2, 5])


# -- random round trips ---------------------------------------------------------------------

leaves = st.one_of(
    st.floats(0, 1e3, allow_nan=False, allow_infinity=False).map(Num),
    st.sampled_from(sorted("xyzstq")).map(Var),
)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda a: BinOp(*a)),
        st.tuples(st.sampled_from(["exp", "sin", "cos", "abs"]), children).map(
            lambda a: Call(a[0], (a[1],))),
        st.tuples(st.sampled_from(["min", "max"]), st.lists(children, min_size=2, max_size=3)).map(
            lambda a: Call(a[0], tuple(a[1]))),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)
envs = st.fixed_dictionaries({v: st.floats(-3, 3) for v in "xyzstq"})


def check_round_trip(tree, env):
    src = to_source(tree)
    again = parse_expression(src)
    assert again == tree
    assert to_source(again) == src
    try:
        direct = float(evaluate(tree, env))
    except EvaluationError:
        with pytest.raises(EvaluationError):
            evaluate(again, env)
        return
    assert math.isclose(float(evaluate(again, env)), direct, rel_tol=1e-12, abs_tol=0)


@settings(max_examples=1000, deadline=None)
@given(trees, envs)
def test_print_parse_round_trip(tree, env):
    check_round_trip(tree, env)
