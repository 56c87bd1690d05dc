"""Dorfman bracket, pairing, Courant axioms, and vertex operations."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcgeo.cgeom import Chart, ChiralJets, SectionE, eval_chiral, eval_section
from bcgeo.courant import (
    AXIOM_NAMES,
    check_courant_axioms,
    check_quasiclassical,
    check_vertex_leibniz,
    chiral_d,
    dorfman,
    dorfman_half,
    pairing,
    pairing_half,
    quasiclassical_limit,
    section_d,
    vx_anchor,
    vx_bracket,
    vx_pairing,
)
from bcgeo.families import random_polynomial, random_section, sample_points


def _conj_point(zs):
    return tuple(list(zs) + [z.conjugate() for z in zs])


def _half(chart, vec, form, pt, order):
    from bcgeo.cgeom import ChiralSection

    sec = ChiralSection(
        tuple(chart.parse(c) for c in vec), tuple(chart.parse(c) for c in form)
    )
    return eval_chiral(chart, sec, pt, order)


CH2 = Chart(2, "0")
PT2 = _conj_point([0.3 + 0.1j, -0.2 + 0.25j])


def test_chiral_d_takes_own_half_partials():
    f = CH2.eval_jet(CH2.parse("z1^2 + zb1"), PT2, 3)
    hol = chiral_d(f, 2, 0)
    anti = chiral_d(f, 2, 2)
    assert hol[0].value == pytest.approx(2 * PT2[0])
    assert hol[1].value == pytest.approx(0.0)
    assert anti[0].value == pytest.approx(1.0)


def test_pairing_has_no_half_normalization():
    a = _half(CH2, ("1", "0"), ("0", "0"), PT2, 2)
    b = _half(CH2, ("0", "0"), ("1", "0"), PT2, 2)
    assert pairing_half(a, b).value == pytest.approx(1.0)
    assert pairing_half(b, a).value == pytest.approx(1.0)


def test_dorfman_vector_part_is_lie_bracket():
    a = _half(CH2, ("z2", "0"), ("0", "0"), PT2, 3)
    b = _half(CH2, ("0", "1"), ("0", "0"), PT2, 3)
    br = dorfman_half(a, b, 0)
    assert br.vec[0].value == pytest.approx(-1.0)
    assert br.vec[1].value == pytest.approx(0.0)
    assert br.form[0].max_abs() == 0.0


def test_dorfman_not_antisymmetric_but_symmetrization_exact():
    # [a,a] = (1/2) D <a,a>
    ch = Chart(1, "0")
    pt = _conj_point([0.2 - 0.4j])
    a = _half(ch, ("z1^2",), ("3*z1",), pt, 3)
    br = dorfman_half(a, a, 0)
    p = pairing_half(a, a)
    df = chiral_d(p, 1, 0)
    diff = br.form[0] - df[0] * 0.5
    assert br.vec[0].max_abs() == 0.0
    assert diff.max_abs() < 1e-13


def test_section_d_has_zero_anchor():
    f = CH2.eval_jet(CH2.parse("z1*zb2"), PT2, 3)
    df = section_d(f, 2)
    assert df.hol.vec[0].max_abs() == 0.0
    assert df.anti.vec[1].max_abs() == 0.0
    assert df.hol.form[0].value == pytest.approx(PT2[3])


def test_full_bracket_halves_do_not_mix():
    s1 = SectionE(("z2", "0"), ("0", "0"), ("0", "0"), ("0", "0"), chart=CH2)
    s2 = SectionE(("0", "1"), ("0", "0"), ("zb1", "0"), ("0", "0"), chart=CH2)
    a = eval_section(CH2, s1, PT2, 3)
    b = eval_section(CH2, s2, PT2, 3)
    br = dorfman(a, b)
    # the antiholomorphic half of s1 vanishes, so the anti bracket does too
    assert br.anti.vec[0].max_abs() == 0.0
    assert br.hol.vec[0].value == pytest.approx(-1.0)


def test_pairing_sums_both_halves():
    s1 = SectionE(("1", "0"), ("0", "0"), ("1", "0"), ("0", "0"), chart=CH2)
    s2 = SectionE(("0", "0"), ("z1", "0"), ("0", "0"), ("zb1", "0"), chart=CH2)
    a = eval_section(CH2, s1, PT2, 2)
    b = eval_section(CH2, s2, PT2, 2)
    assert pairing(a, b).value == pytest.approx(PT2[0] + PT2[2])


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_axioms_hold_on_random_draws(seed):
    rng = np.random.default_rng(seed)
    chart = Chart(2, "0")
    sections = [random_section(rng, chart) for _ in range(3)]
    functions = [random_polynomial(rng, 2) for _ in range(2)]
    points = sample_points(rng, 2, 2)
    rep = check_courant_axioms(chart, sections, functions, points, order=3)
    assert rep["passed"], rep["residuals"]


def test_axiom_names_are_stable():
    assert AXIOM_NAMES == (
        "leibniz_jacobi",
        "anchor_morphism",
        "function_leibniz",
        "symmetrization",
        "pairing_invariance",
        "anchor_kills_d",
    )


def test_checker_requires_enough_inputs():
    rng = np.random.default_rng(0)
    chart = Chart(2, "0")
    secs = [random_section(rng, chart) for _ in range(2)]
    fns = [random_polynomial(rng, 2) for _ in range(2)]
    with pytest.raises(ValueError):
        check_courant_axioms(chart, secs, fns, [PT2])


# --- vertex operations -------------------------------------------------------

def test_vertex_bracket_h1_is_minus_dorfman():
    a = _half(CH2, ("z2*z1", "0"), ("z1", "0"), PT2, 3)
    b = _half(CH2, ("0", "z1^2"), ("0", "2*z2"), PT2, 3)
    vx = vx_bracket(a, b, 0)
    classical = quasiclassical_limit(vx)
    expected = dorfman_half(a, b, 0)
    diff = (classical + expected).max_abs_value()
    assert diff < 1e-13


def test_vertex_pairing_h1_is_minus_pairing():
    a = _half(CH2, ("z2", "0"), ("z1", "0"), PT2, 2)
    b = _half(CH2, ("1", "0"), ("0", "z2"), PT2, 2)
    vx = vx_pairing(a, b, 0)
    assert vx.coeff(0) is None
    got = quasiclassical_limit(vx)
    want = pairing_half(a, b)
    assert (got + want).max_abs() < 1e-13


def test_vertex_anchor_h1_is_minus_application():
    a = _half(CH2, ("z1", "z2"), ("0", "0"), PT2, 3)
    f = CH2.eval_jet(CH2.parse("z1*z2"), PT2, 3)
    vx = vx_anchor(a, f, 0)
    got = quasiclassical_limit(vx)
    # v(f) = z1 d1(f) + z2 d2(f) = 2 z1 z2
    assert got.value == pytest.approx(-2 * PT2[0] * PT2[1])


def test_vertex_leibniz_checker():
    rng = np.random.default_rng(11)
    chart = Chart(2, "0.1*z1*zb1")
    triples = [
        tuple(random_section(rng, chart).hol for _ in range(3)) for _ in range(3)
    ]
    pts = sample_points(rng, 2, 2)
    rep = check_vertex_leibniz(chart, triples, pts, order=3, which_half="hol")
    assert rep["max_residual"] <= 1e-9


def test_quasiclassical_checker_both_orders():
    rng = np.random.default_rng(12)
    chart = Chart(2, "0.2*z1*z2 + 0.2*zb1*zb2")
    sections = [random_section(rng, chart).anti for _ in range(3)]
    functions = [random_polynomial(rng, 2) for _ in range(2)]
    pts = sample_points(rng, 2, 2)
    rep = check_quasiclassical(
        chart, sections, functions, pts, order=3, which_half="anti"
    )
    assert rep["limit_residual"] <= 1e-12
    assert rep["low_order_residual"] <= 1e-12
