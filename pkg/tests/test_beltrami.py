"""Structure-tensor differential, symmetry action, and the induced flow."""

import numpy as np
import pytest

from bcgeo.beltrami import (
    BeltramiField,
    MJets,
    check_theorem11,
    component_delta,
    d_op,
    delta_m,
    gb_map,
    phi1,
    phi2,
    phi2_jet_form,
)
from bcgeo.cgeom import Chart, DataError, SectionE, eval_section
from bcgeo.families import random_beltrami, random_section, sample_points
from bcgeo.fieldlang import ZERO, Add, Coord, Mul, Num
from bcgeo.jets import array_values


def _conj_point(zs):
    return tuple(list(zs) + [z.conjugate() for z in zs])


CH = Chart(2, "0")
PT = _conj_point([0.22 + 0.1j, -0.15 + 0.3j])


def _rand_poly(rng, kind="both", terms=3):
    n = 2
    coords = []
    if kind in ("both", "hol"):
        coords += [Coord("z", k + 1) for k in range(n)]
    if kind in ("both", "anti"):
        coords += [Coord("zb", k + 1) for k in range(n)]
    e = None
    for _ in range(terms):
        t = Num(complex(rng.normal(scale=0.4), rng.normal(scale=0.4)))
        for _ in range(int(rng.integers(0, 3))):
            t = Mul(t, coords[rng.integers(0, len(coords))])
        e = t if e is None else Add(e, t)
    return e


def _rand_block(rng, kind="both"):
    return [[_rand_poly(rng, kind) for _ in range(2)] for _ in range(2)]


def _rand_tuple(rng, kind="both"):
    return tuple(_rand_poly(rng, kind) for _ in range(2))


def test_field_blocks_validated():
    with pytest.raises(DataError):
        BeltramiField([["0"]], [["0"]], [["0"]], [["0"]], dim=2, chart=CH)


def test_mjets_algebra():
    f = random_beltrami(np.random.default_rng(1), CH)
    m = f.eval_jets(CH, PT, 3)
    s = m + m
    d = s - m
    diff = d - m
    assert diff.max_abs_value() < 1e-14
    t = m.truncate(1)
    assert t.order == 1


def test_d_op_blocks():
    # alpha with v = (zb1, 0): mu[0,0] = d_{zb1} v^1 = 1, rest zero
    alpha = SectionE(("zb1", "0"), ("0", "0"), ("0", "0"), ("0", "0"), chart=CH)
    aj = eval_section(CH, alpha, PT, 2)
    d = d_op(aj)
    assert d.mu[0, 0].value == pytest.approx(1.0)
    assert d.mu[1, 1].max_abs() == 0.0
    assert d.g[0, 0].max_abs() == 0.0


def test_d_op_b_block_antisymmetrizes_mixed_partials():
    # omega = (zb2, 0), omegabar = (0, z1): b[i,j] = d_i omegabar_j - d_{jb} omega_i
    alpha = SectionE(("0", "0"), ("zb2", "0"), ("0", "0"), ("0", "z1"), chart=CH)
    aj = eval_section(CH, alpha, PT, 2)
    d = d_op(aj)
    assert d.b[0, 1].value == pytest.approx(1.0 - 1.0)
    assert d.b[0, 0].max_abs() == 0.0


def test_delta_matches_component_formulas_at_zero_g():
    rng = np.random.default_rng(7)
    worst = 0.0
    worst_g = 0.0
    for trial in range(20):
        zero = [[ZERO] * 2 for _ in range(2)]
        field = BeltramiField(
            zero, _rand_block(rng), _rand_block(rng), _rand_block(rng), 2
        )
        alpha = SectionE(
            _rand_tuple(rng), _rand_tuple(rng), _rand_tuple(rng), _rand_tuple(rng)
        )
        pt = sample_points(rng, 2, 1)[0]
        aj = eval_section(CH, alpha, pt, 3)
        mj = field.eval_jets(CH, pt, 3)
        dm = delta_m(aj, mj)
        cd = component_delta(aj, mj)
        diff = dm - cd
        for block in (diff.mu, diff.mubar, diff.b):
            worst = max(worst, float(np.max(np.abs(array_values(block)))))
        worst_g = max(worst_g, float(np.max(np.abs(array_values(dm.g)))))
    assert worst < 1e-8
    assert worst_g < 1e-8


def test_component_formulas_reject_nonzero_g():
    rng = np.random.default_rng(3)
    field = random_beltrami(rng, CH)
    alpha = random_section(rng, CH)
    aj = eval_section(CH, alpha, PT, 3)
    mj = field.eval_jets(CH, PT, 3)
    with pytest.raises(DataError):
        component_delta(aj, mj)


def test_phi2_sandwich_equals_jet_form():
    rng = np.random.default_rng(5)

    def split_piece(kind):
        return (_rand_tuple(rng, kind), _rand_tuple(rng, kind))

    worst = 0.0
    for trial in range(5):
        m_factors = [(split_piece("hol"), split_piece("anti")) for _ in range(3)]
        hol_factors = [(split_piece("hol"), _rand_poly(rng, "anti")) for _ in range(2)]
        anti_factors = [(_rand_poly(rng, "hol"), split_piece("anti")) for _ in range(2)]

        v = [None] * 2
        om = [None] * 2
        vb = [None] * 2
        omb = [None] * 2
        for (vec, form), fbar in hol_factors:
            for i in range(2):
                tv = Mul(fbar, vec[i])
                tf = Mul(fbar, form[i])
                v[i] = tv if v[i] is None else Add(v[i], tv)
                om[i] = tf if om[i] is None else Add(om[i], tf)
        for f, (vec, form) in anti_factors:
            for i in range(2):
                tv = Mul(f, vec[i])
                tf = Mul(f, form[i])
                vb[i] = tv if vb[i] is None else Add(vb[i], tv)
                omb[i] = tf if omb[i] is None else Add(omb[i], tf)
        alpha = SectionE(v, om, vb, omb)

        blocks = {key: [[None] * 2 for _ in range(2)] for key in "g mu mubar b".split()}
        for (hvec, hform), (avec, aform) in m_factors:
            for i in range(2):
                for j in range(2):
                    for key, x, y in (
                        ("g", hvec[i], avec[j]),
                        ("mu", hvec[i], aform[j]),
                        ("mubar", hform[i], avec[j]),
                        ("b", hform[i], aform[j]),
                    ):
                        t = Mul(x, y)
                        cell = blocks[key][i][j]
                        blocks[key][i][j] = t if cell is None else Add(cell, t)
        field = BeltramiField(
            blocks["g"], blocks["mu"], blocks["mubar"], blocks["b"], 2
        )
        pt = sample_points(rng, 2, 1)[0]
        aj = eval_section(CH, alpha, pt, 3)
        mj = field.eval_jets(CH, pt, 3)
        sandwich = phi2(d_op(aj), mj)
        oracle = phi2_jet_form(CH, pt, 3, m_factors, hol_factors, anti_factors)
        worst = max(worst, (sandwich - oracle).max_abs_value())
    assert worst < 1e-10


def test_phi1_uses_field_columns():
    # with M = 0 the transport part vanishes identically
    alpha = random_section(np.random.default_rng(2), CH)
    aj = eval_section(CH, alpha, PT, 3)
    mj = MJets.zero(2, 3, 4)
    assert phi1(aj, mj).max_abs_value() == 0.0


def test_gb_map_of_unit_g():
    field = BeltramiField(
        [["1", "0"], ["0", "1"]],
        [["0", "0"], ["0", "0"]],
        [["0", "0"], ["0", "0"]],
        [["0", "0"], ["0", "0"]],
        dim=2,
        chart=CH,
    )
    mj = field.eval_jets(CH, PT, 3)
    bg = gb_map(mj)
    gv = array_values(bg.G)
    bv = array_values(bg.B)
    expected_g = np.zeros((4, 4), dtype=complex)
    expected_g[:2, 2:] = np.eye(2)
    expected_g[2:, :2] = np.eye(2)
    expected_b = np.zeros((4, 4), dtype=complex)
    expected_b[:2, 2:] = -np.eye(2)
    expected_b[2:, :2] = np.eye(2)
    assert np.max(np.abs(gv - expected_g)) < 1e-14
    # constant two-form: closed, so the field strength still vanishes
    assert np.max(np.abs(bv - expected_b)) < 1e-14


def test_gb_map_symmetries():
    rng = np.random.default_rng(9)
    field = random_beltrami(rng, CH)
    mj = field.eval_jets(CH, PT, 3)
    bg = gb_map(mj)
    gv = array_values(bg.G)
    bv = array_values(bg.B)
    assert np.max(np.abs(gv - gv.T)) < 1e-12
    assert np.max(np.abs(bv + bv.T)) < 1e-12


def test_induced_flow_matches_lie_derivative():
    rng = np.random.default_rng(21)
    worst = 0.0
    for _ in range(4):
        field = random_beltrami(rng, CH)
        alpha = random_section(rng, CH)
        pts = sample_points(rng, 2, 2, box=0.3)
        rep = check_theorem11(CH, alpha, field, pts, order=3, tol=1e-8)
        worst = max(worst, rep["max_residual"])
        assert rep["passed"], rep
    assert worst < 1e-8


def test_flow_check_reports_both_channels():
    rng = np.random.default_rng(22)
    field = random_beltrami(rng, CH)
    alpha = random_section(rng, CH)
    pts = sample_points(rng, 2, 1, box=0.3)
    rep = check_theorem11(CH, alpha, field, pts, order=3, tol=1e-8)
    assert set(rep) >= {"residual_g", "residual_b", "max_residual", "tol", "passed"}
