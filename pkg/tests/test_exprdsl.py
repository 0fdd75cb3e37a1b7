import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sioshift.exprdsl import (Bin, Call, DomainError, Neg,
                              NonDifferentiableError, Num, ParseError,
                              UnknownIdentifierError, Var, differentiate,
                              evaluate, parse, pretty, substitute)


def central_diff(expr, t, rel=1e-6):
    h = rel * t
    return (evaluate(expr, t + h) - evaluate(expr, t - h)) / (2.0 * h)


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

def test_parse_literal():
    assert parse("2") == Num(2.0 + 0j)


def test_parse_nested_calls():
    expected = Bin("+", Num(2.0 + 0j), Call("sin", Call("log", Call("log", Var("t")))))
    assert parse("2+sin(log(log(t)))") == expected


def test_parse_division_of_call():
    expected = Bin("/", Call("atan", Call("log", Var("t"))), Num(4.0 + 0j))
    assert parse("atan(log(t))/4") == expected


def test_parse_precedence_and_associativity():
    assert parse("1-2-3") == Bin("-", Bin("-", Num(1 + 0j), Num(2 + 0j)), Num(3 + 0j))
    assert parse("2^3^2") == Bin("^", Num(2 + 0j), Bin("^", Num(3 + 0j), Num(2 + 0j)))
    assert parse("1+2*3") == Bin("+", Num(1 + 0j), Bin("*", Num(2 + 0j), Num(3 + 0j)))
    assert parse("-t^2") == Neg(Bin("^", Var("t"), Num(2 + 0j)))


def test_parse_imaginary_unit():
    assert evaluate(parse("2*i"), 1.0) == 2j


def test_parse_error_carries_offset_and_expected():
    with pytest.raises(ParseError) as err:
        parse("2+*3")
    assert err.value.offset == 2
    assert err.value.expected


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as err:
        parse("2+foo(t)")
    assert err.value.name == "foo"
    with pytest.raises(UnknownIdentifierError):
        parse("x+1", variable="t")


def test_empty_input_rejected():
    with pytest.raises(ParseError):
        parse("   ")


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

def test_eval_literal():
    assert evaluate(parse("2"), 5.0) == 2.0


def test_eval_log_at_e():
    assert evaluate(parse("log(t)"), math.e) == pytest.approx(1.0)


def test_eval_double_log_composition():
    t = math.exp(math.exp(math.pi / 2.0))
    got = evaluate(parse("2+sin(log(log(t)))"), t)
    assert got == pytest.approx(3.0, abs=1e-12)


def test_eval_vectorized_matches_scalar():
    e = parse("exp(-(log(t))^2)+atan(t)/2")
    ts = np.array([0.5, 1.0, 7.3])
    vec = evaluate(e, ts)
    for tv, got in zip(ts, vec):
        assert got == pytest.approx(evaluate(e, float(tv)))


def test_domain_error_names_subexpression():
    with pytest.raises(DomainError) as err:
        evaluate(parse("1+log(t-2)"), 1.0)
    assert "log" in str(err.value)


def test_division_by_zero():
    with pytest.raises(DomainError):
        evaluate(parse("1/(t-1)"), 1.0)


def test_overflow_is_a_domain_error():
    with pytest.raises(DomainError):
        evaluate(parse("exp(exp(t))"), 10.0)


def test_sqrt_of_negative_real_rejected():
    with pytest.raises(DomainError):
        evaluate(parse("sqrt(t-5)"), 1.0)


# --------------------------------------------------------------------------
# differentiation
# --------------------------------------------------------------------------

def test_derivative_of_variable():
    assert differentiate(Var("t")) == Num(1.0 + 0j)


def test_derivative_atan_log_quarter():
    d = differentiate(parse("atan(log(t))/4"))
    for t in (0.5, 1.0, 2.0, 11.0):
        expected = 1.0 / (4.0 * t * (1.0 + math.log(t) ** 2))
        assert evaluate(d, t) == pytest.approx(expected, rel=1e-12)
        assert evaluate(d, t) == pytest.approx(central_diff(parse("atan(log(t))/4"), t),
                                               rel=1e-5)


def test_derivative_sin_log_log():
    e = parse("sin(log(log(t)))")
    d = differentiate(e)
    for t in (3.0, 10.0, 200.0):
        expected = math.cos(math.log(math.log(t))) / (t * math.log(t))
        assert evaluate(d, t) == pytest.approx(expected, rel=1e-12)
        assert evaluate(d, t) == pytest.approx(central_diff(e, t), rel=1e-5)


def test_abs_is_not_differentiable():
    with pytest.raises(NonDifferentiableError):
        differentiate(parse("abs(t)"))


def test_general_power_rule():
    e = parse("t^t")
    d = differentiate(e)
    t = 1.7
    expected = t ** t * (math.log(t) + 1.0)
    assert evaluate(d, t) == pytest.approx(expected, rel=1e-12)


def test_substitute_composes():
    outer = parse("atan(log(t))")
    inner = parse("t*exp(1)")
    composed = substitute(outer, inner)
    assert evaluate(composed, 2.0) == pytest.approx(
        evaluate(outer, 2.0 * math.e), rel=1e-14)


# --------------------------------------------------------------------------
# property tests
# --------------------------------------------------------------------------

def _expr_strategy(allow_abs=False, max_leaves=10):
    leaf = st.one_of(
        st.floats(min_value=0.1, max_value=4.0).map(
            lambda v: Num(complex(round(v, 3)))),
        st.just(Var("t")),
    )
    fns = ["sin", "cos", "exp", "log", "sqrt", "atan"]
    if allow_abs:
        fns.append("abs")

    def extend(children):
        return st.one_of(
            st.tuples(st.sampled_from("+-*/"), children, children).map(
                lambda v: Bin(v[0], v[1], v[2])),
            st.tuples(st.sampled_from(fns), children).map(
                lambda v: Call(v[0], v[1])),
            children.map(Neg),
            st.tuples(children, st.integers(min_value=0, max_value=3)).map(
                lambda v: Bin("^", v[0], Num(complex(v[1])))),
        )

    return st.recursive(leaf, extend, max_leaves=max_leaves)


@settings(max_examples=150, deadline=None)
@given(_expr_strategy(allow_abs=True))
def test_pretty_print_round_trip(expr):
    assert parse(pretty(expr)) == expr


@settings(max_examples=150, deadline=None)
@given(_expr_strategy(), st.floats(min_value=0.3, max_value=5.0))
def test_derivative_matches_central_differences(expr, t):
    try:
        d = differentiate(expr)
        exact = evaluate(d, t)
        approx = central_diff(expr, t)
    except DomainError:
        assume(False)
        return
    assume(abs(exact) < 1e6)
    # second-order truncation of the central difference dominates the slack
    assert abs(exact - approx) <= 1e-5 * (1.0 + abs(exact))


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="0123456789.+-*/^()ti sincoelgqrabx_", max_size=40))
def test_parser_never_crashes(source):
    try:
        parse(source)
    except ParseError:
        pass
