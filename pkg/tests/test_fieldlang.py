"""Expression language: parsing, evaluation, conjugation."""

import pytest

from bcgeo.fieldlang import (
    Add,
    Coord,
    Mul,
    Num,
    ParseError,
    conjugate_expr,
    eval_value,
    parse,
    to_text,
)


def test_basic_arithmetic():
    e = parse("z1^2 + 3*zb2 - 1", dim=2)
    val = eval_value(e, (2.0, 0.0, 0.0, 0.5))
    assert val == pytest.approx(2.0 ** 2 + 3 * 0.5 - 1)


def test_precedence_and_unary_minus():
    e = parse("-z1 + z2*z1^2", dim=2)
    val = eval_value(e, (2.0, 3.0, 0.0, 0.0))
    assert val == pytest.approx(-2.0 + 3.0 * 4.0)


def test_division_and_imaginary_unit():
    e = parse("(1 + 2*i)/z1", dim=1)
    val = eval_value(e, (2.0, 0.0))
    assert val == pytest.approx((1 + 2j) / 2)


def test_exp_log_calls():
    e = parse("log(exp(z1))", dim=1)
    assert eval_value(e, (0.37, 0.0)) == pytest.approx(0.37)


def test_parameters():
    e = parse("lam*z1", dim=1, params=("lam",))
    assert eval_value(e, (3.0, 0.0), {"lam": 2.0}) == pytest.approx(6.0)


def test_unknown_names_rejected():
    with pytest.raises(ParseError):
        parse("q*z1", dim=1)
    with pytest.raises(ParseError):
        parse("z3", dim=2)
    with pytest.raises(ParseError):
        parse("sin(z1)", dim=1)


def test_no_implicit_multiplication():
    with pytest.raises(ParseError):
        parse("2 z1", dim=1)


def test_no_unary_plus():
    with pytest.raises(ParseError):
        parse("(+1)*z1", dim=1)


def test_conjugation_swaps_chirality():
    e = parse("(2 + i)*z1^2*zb2", dim=2)
    c = conjugate_expr(e)
    pt = (0.3 + 0.1j, -0.2 + 0.4j, 0.3 - 0.1j, -0.2 - 0.4j)
    assert eval_value(c, pt) == pytest.approx(eval_value(e, pt).conjugate())


def test_conjugation_is_involutive():
    e = parse("exp(i*z1) + zb1/(1 + z1*zb1)", dim=1)
    pt = (0.2 - 0.3j, 0.2 + 0.3j)
    back = conjugate_expr(conjugate_expr(e))
    assert eval_value(back, pt) == pytest.approx(eval_value(e, pt))


def test_render_round_trip():
    e = Add(Mul(Num(2 + 0j), Coord("z", 1)), Coord("zb", 2))
    text = to_text(e)
    again = parse(text, dim=2)
    pt = (1.5, -0.5, 0.0, 2.0)
    assert eval_value(again, pt) == pytest.approx(eval_value(e, pt))
