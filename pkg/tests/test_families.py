"""Builtin data families and random generators."""

import numpy as np
import pytest

from bcgeo.cgeom import Chart
from bcgeo.families import (
    flat,
    fubini_study,
    linear_dilaton,
    random_beltrami,
    random_graded_element,
    random_hermitian,
    random_kahler,
    random_polynomial,
    random_section,
    sample_points,
    well_conditioned_points,
)
from bcgeo.fieldlang import eval_value
from bcgeo.jets import array_values


def test_flat_family():
    data = flat(3)
    pt = (0.1, 0.2, 0.3, 0.1, 0.2, 0.3)
    vals = array_values(data.g_jets(pt, 0))
    assert np.array_equal(vals, np.eye(3))
    assert data.f_jet(pt, 2).max_abs() == 0.0


def test_linear_dilaton_weight():
    data = linear_dilaton(2, 0.5)
    pt = (1.0, 0.0, 1.0, 0.0)
    assert data.f_jet(pt, 0).value == pytest.approx(-2.0)


def test_fubini_study_metric_at_origin():
    data = fubini_study()
    vals = array_values(data.g_jets((0.0, 0.0), 0))
    assert vals[0, 0] == pytest.approx(1.0)


def test_sample_points_live_on_conjugate_locus():
    rng = np.random.default_rng(1)
    for pt in sample_points(rng, 3, 5, box=0.7):
        assert len(pt) == 6
        for k in range(3):
            assert pt[3 + k] == pt[k].conjugate()
            assert abs(pt[k].real) <= 0.7 and abs(pt[k].imag) <= 0.7


def test_random_polynomial_evaluates():
    rng = np.random.default_rng(2)
    e = random_polynomial(rng, 2)
    val = eval_value(e, (0.1, 0.2, 0.1, 0.2))
    assert np.isfinite(val.real) and np.isfinite(val.imag)


def test_random_polynomial_real_mode():
    # real coefficients: the value is real at any real point
    rng = np.random.default_rng(3)
    e = random_polynomial(rng, 2, real=True)
    val = eval_value(e, (0.3, -0.1, 0.3, -0.1))
    assert abs(val.imag) < 1e-12


def test_random_hermitian_values_are_hermitian():
    rng = np.random.default_rng(4)
    data = random_hermitian(rng)
    for pt in sample_points(rng, 2, 4):
        vals = array_values(data.g_jets(pt, 0))
        assert np.max(np.abs(vals - vals.conj().T)) < 1e-13


def test_random_hermitian_near_identity():
    rng = np.random.default_rng(5)
    data = random_hermitian(rng)
    vals = array_values(data.g_jets((0.0, 0.0, 0.0, 0.0), 0))
    assert np.max(np.abs(vals - np.eye(2))) < 0.5


def test_random_kahler_lower_block_is_hermitian_too():
    rng = np.random.default_rng(6)
    data = random_kahler(rng)
    for pt in sample_points(rng, 2, 3):
        vals = array_values(data.g_jets(pt, 0))
        assert np.max(np.abs(vals - vals.conj().T)) < 1e-12


def test_random_kahler_rejects_high_dim():
    with pytest.raises(ValueError):
        random_kahler(np.random.default_rng(0), n=3)


def test_random_section_and_beltrami_shapes():
    rng = np.random.default_rng(7)
    chart = Chart(2, "0")
    s = random_section(rng, chart)
    assert len(s.hol.vec) == 2
    f = random_beltrami(rng, chart)
    m = f.eval_jets(chart, (0.1, 0.1, 0.1, 0.1), 2)
    assert m.g.shape == (2, 2)
    # g block stays near the identity for invertibility
    vals = array_values(m.g)
    assert np.max(np.abs(vals - np.eye(2))) < 0.8


def test_random_graded_elements_cover_degrees():
    rng = np.random.default_rng(8)
    chart = Chart(2, "0")
    for degree in range(4):
        e = random_graded_element(rng, chart, degree=degree)
        assert e.degree == degree
        if degree in (1, 2):
            assert e.section is not None


def test_well_conditioned_points_guard():
    rng = np.random.default_rng(9)
    data = random_hermitian(rng)
    pts = well_conditioned_points(data, rng, 4, cond_max=10.0)
    assert len(pts) == 4
    for pt in pts:
        vals = array_values(data.g_jets(pt, 0))
        assert np.linalg.cond(vals) <= 10.0


def test_well_conditioned_points_exhaustion():
    rng = np.random.default_rng(10)
    data = flat(2)
    with pytest.raises(RuntimeError):
        well_conditioned_points(data, rng, 1, cond_max=0.5, max_tries=10)
