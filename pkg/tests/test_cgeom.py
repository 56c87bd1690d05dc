"""Charts, typed tensors, sections, and realified differential operators."""

import numpy as np
import pytest

from bcgeo.cgeom import (
    Chart,
    ChiralJets,
    DataError,
    IndexType,
    SectionE,
    TensorField,
    eval_section,
    exterior_derivative_jets,
    extract_block,
    lie_derivative_jets,
    realify,
)
from bcgeo.jets import array_values


def _conj_point(zs):
    return tuple(list(zs) + [z.conjugate() for z in zs])


def test_chart_rejects_large_dim():
    with pytest.raises(DataError):
        Chart(5, "0")


def test_chart_point_length_checked():
    ch = Chart(2, "0")
    with pytest.raises(DataError):
        ch.eval_value(ch.parse("z1"), (1.0, 2.0))


def test_chart_volume_exponent_evaluates():
    ch = Chart(1, "z1*zb1")
    j = ch.eval_jet(ch.volume_exponent, (2.0, 3.0), 2)
    assert j.value == pytest.approx(6.0)
    assert j.derivative(0).value == pytest.approx(3.0)


def test_index_types():
    assert IndexType.HOL_UP.is_hol
    assert not IndexType.ANTI_DOWN.is_hol
    assert IndexType.HOL_UP.conjugated is IndexType.ANTI_UP
    assert IndexType.ANTI_DOWN.conjugated is IndexType.HOL_DOWN


def test_tensor_field_shape_guard():
    ch = Chart(2, "0")
    sig = (IndexType.HOL_UP, IndexType.ANTI_UP)
    with pytest.raises(DataError):
        TensorField(sig, [["1"]], dim=2, chart=ch)


def test_tensor_conjugate_values():
    ch = Chart(1, "0")
    sig = (IndexType.HOL_UP, IndexType.ANTI_UP)
    t = TensorField(sig, [["(2 + i)*z1"]], dim=1, chart=ch)
    c = t.conjugate()
    pt = _conj_point([0.3 + 0.5j])
    a = array_values(t.eval_jets(ch, pt, 0))[0, 0]
    b = array_values(c.eval_jets(ch, pt, 0))[0, 0]
    assert b == pytest.approx(a.conjugate())


def test_realify_extract_round_trip():
    ch = Chart(2, "0")
    sig = (IndexType.HOL_UP, IndexType.ANTI_UP)
    t = TensorField(sig, [["z1", "1"], ["zb2", "z2*z2"]], dim=2, chart=ch)
    jets = t.eval_jets(ch, _conj_point([0.1j, 0.2]), 2)
    full = realify(sig, jets, 2)
    assert full.shape == (4, 4)
    # off-block entries vanish
    assert np.max(np.abs(array_values(full)[:2, :2])) == 0.0
    back = extract_block(full, sig, 2)
    assert np.max(np.abs(array_values(back) - array_values(jets))) == 0.0


def test_lie_derivative_of_vector_is_commutator():
    ch = Chart(1, "0")
    pt = _conj_point([0.4 + 0.2j])
    order = 3
    v = np.array(
        [ch.eval_jet(ch.parse("z1^2"), pt, order),
         ch.eval_jet(ch.parse("zb1"), pt, order)],
        dtype=object,
    )
    w = np.array(
        [ch.eval_jet(ch.parse("zb1*z1"), pt, order),
         ch.eval_jet(ch.parse("2*z1"), pt, order)],
        dtype=object,
    )
    lv = lie_derivative_jets(v, w, ("up",))
    # [v,w]^k = v^j d_j w^k - w^j d_j v^k by hand
    expected = np.empty(2, dtype=object)
    for k in range(2):
        acc = None
        for j in range(2):
            term = v[j].truncate(order - 1) * w[k].derivative(j)
            term = term - w[j].truncate(order - 1) * v[k].derivative(j)
            acc = term if acc is None else acc + term
        expected[k] = acc
    diff = max((lv[k] - expected[k]).max_abs() for k in range(2))
    assert diff < 1e-13


def test_lie_derivative_down_slot_sign():
    # constant vector, linear covector: (L_v w)_k = w_j d_k v^j = 0 when
    # v is constant, so only the transport term remains
    ch = Chart(1, "0")
    pt = _conj_point([0.3])
    v = np.array(
        [ch.eval_jet(ch.parse("1"), pt, 2), ch.eval_jet(ch.parse("0"), pt, 2)],
        dtype=object,
    )
    w = np.array(
        [ch.eval_jet(ch.parse("z1"), pt, 2), ch.eval_jet(ch.parse("0"), pt, 2)],
        dtype=object,
    )
    lv = lie_derivative_jets(v, w, ("down",))
    assert lv[0].value == pytest.approx(1.0)
    assert lv[1].value == pytest.approx(0.0)


def test_exterior_derivative_squares_to_zero():
    ch = Chart(2, "0")
    pt = _conj_point([0.2 + 0.1j, -0.3])
    exprs = ["z1*zb2", "z2^2", "zb1", "z1*z2*zb1"]
    form = np.array([ch.eval_jet(ch.parse(e), pt, 3) for e in exprs], dtype=object)
    dd = exterior_derivative_jets(exterior_derivative_jets(form))
    worst = max(j.max_abs() for j in dd.flat)
    assert worst < 1e-13


def test_exterior_derivative_of_one_form_antisymmetric():
    ch = Chart(1, "0")
    pt = _conj_point([0.25])
    form = np.array(
        [ch.eval_jet(ch.parse("zb1^2"), pt, 2),
         ch.eval_jet(ch.parse("z1*zb1"), pt, 2)],
        dtype=object,
    )
    d = exterior_derivative_jets(form)
    s = d + d.T
    worst = max(j.max_abs() for j in s.flat)
    assert worst < 1e-13


def test_section_halves_and_eval():
    ch = Chart(2, "0")
    s = SectionE(
        v=("z2", "0"), omega=("1", "z1"),
        vbar=("zb2", "0"), omegabar=("1", "zb1"),
        chart=ch,
    )
    pt = _conj_point([0.5, 0.25j])
    sj = eval_section(ch, s, pt, 2)
    assert sj.n == 2
    assert sj.hol.vec[0].value == pytest.approx(0.25j)
    assert sj.anti.vec[0].value == pytest.approx(-0.25j)
    assert sj.anti.form[1].value == pytest.approx(0.5)


def test_chiral_jets_truncate_and_add():
    ch = Chart(1, "0")
    pt = _conj_point([0.3])
    a = ChiralJets(
        np.array([ch.eval_jet(ch.parse("z1"), pt, 3)], dtype=object),
        np.array([ch.eval_jet(ch.parse("1"), pt, 3)], dtype=object),
    )
    b = a.truncate(1)
    assert b.order == 1
    c = b + b
    assert c.vec[0].value == pytest.approx(0.6)
    assert (-c).vec[0].value == pytest.approx(-0.6)


def test_conjugate_locus_not_required():
    # evaluation works off the conjugate locus: zb independent of z
    ch = Chart(1, "0")
    val = ch.eval_value(ch.parse("z1*zb1"), (2.0, 5.0))
    assert val == pytest.approx(10.0)
