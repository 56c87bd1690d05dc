"""Four-step graded complex on the holomorphic half of the generalized
tangent bundle.

Degrees 0 and 3 carry a scalar function; degrees 1 and 2 carry a scalar
together with a one-chirality section (vector plus one-form).  The
degree +1 differential combines the holomorphic exterior derivative with
the volume-weighted divergence, the degree -1 operator contracts the
complex back, and the first homotopies of the commutative and associative
products are built from the canonical pairing.

The weighted divergence acts on the vector part of a section only,
div(A) = d_i A^i + A^i d_i f with f the chart's volume exponent; it is
zero on form parts, which is exactly what makes the differential square
to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cgeom import Chart, ChiralJets, ChiralSection, DataError
from .courant import chiral_d, pairing_half
from .fieldlang import Expr, Neg, ZERO
from .jets import Jet, jet_const, jet_zeros


class GradedElement:
    """Element of the complex: a degree, a scalar, and a mid-degree section."""

    def __init__(self, degree: int, scalar, section=None, dim: int | None = None,
                 chart: Chart | None = None):
        if degree not in (0, 1, 2, 3):
            raise DataError("degree must lie in 0..3")
        if isinstance(scalar, str):
            if chart is None:
                raise DataError("string components require a chart")
            scalar = chart.parse(scalar)
        if section is not None and not isinstance(section, ChiralSection):
            vec, form = section

            def conv(items):
                out = []
                for item in items:
                    if isinstance(item, str):
                        if chart is None:
                            raise DataError("string components require a chart")
                        item = chart.parse(item)
                    out.append(item)
                return tuple(out)

            section = ChiralSection(conv(vec), conv(form))
        if degree in (0, 3):
            if section is not None:
                raise DataError("degrees 0 and 3 carry a scalar only")
            if dim is None and chart is not None:
                dim = chart.dim
            if dim is None:
                raise DataError("degree 0/3 elements need an explicit dim")
        else:
            if section is None:
                raise DataError("degrees 1 and 2 need a section part")
            dim = section.dim
        self.degree = degree
        self.scalar = scalar
        self.section = section
        self.dim = dim

    @staticmethod
    def zero(degree: int, dim: int) -> "GradedElement":
        if degree in (0, 3):
            return GradedElement(degree, ZERO, dim=dim)
        z = (ZERO,) * dim
        return GradedElement(degree, ZERO, ChiralSection(z, z))


@dataclass
class GradedJets:
    """Evaluated element: scalar jet plus section jets in mid degrees."""

    degree: int
    scalar: Jet
    section: ChiralJets | None = None

    @property
    def n(self) -> int:
        return self.scalar.num_vars // 2

    def __add__(self, other: "GradedJets") -> "GradedJets":
        if self.degree != other.degree:
            raise DataError("cannot add elements of different degrees")
        if (self.section is None) != (other.section is None):
            raise DataError("section parts do not match")
        sec = None
        if self.section is not None:
            sec = ChiralJets(
                self.section.vec + other.section.vec,
                self.section.form + other.section.form,
            )
        return GradedJets(self.degree, self.scalar + other.scalar, sec)

    def max_abs(self) -> float:
        worst = self.scalar.max_abs()
        if self.section is not None:
            for jet in list(self.section.vec) + list(self.section.form):
                worst = max(worst, jet.max_abs())
        return worst


def eval_element(e: GradedElement, chart: Chart, point, order: int) -> GradedJets:
    if e.dim != chart.dim:
        raise DataError("element dimension does not match the chart")
    scalar = chart.eval_jet(e.scalar, point, order)
    section = None
    if e.section is not None:
        n = chart.dim
        vec = np.empty(n, dtype=object)
        form = np.empty(n, dtype=object)
        for k in range(n):
            vec[k] = chart.eval_jet(e.section.vec[k], point, order)
            form[k] = chart.eval_jet(e.section.form[k], point, order)
        section = ChiralJets(vec, form)
    return GradedJets(e.degree, scalar, section)


def weighted_divergence(vec: np.ndarray, f_jet: Jet) -> Jet:
    """d_i A^i + A^i d_i f over the holomorphic band; drops one order."""
    n = vec.shape[0]
    p = vec[0].order
    f1 = f_jet.truncate(p)
    acc = None
    for i in range(n):
        term = vec[i].truncate(p).derivative(i)
        term = term + vec[i].truncate(p - 1) * f1.derivative(i)
        acc = term if acc is None else acc + term
    return acc


def q_jets(e: GradedJets, f_jet: Jet) -> GradedJets:
    """Degree +1 differential at jet level; drops one order.

    degree 0: f -> (0, df); degree 1: (f, A) -> (f - div(A)/2, df);
    degree 2: (f, A) -> div(A)/2; degree 3 has no image.
    """
    n = e.n
    p = e.scalar.order
    nv = e.scalar.num_vars
    if e.degree == 0:
        zero_vec = jet_zeros((n,), p - 1, nv)
        section = ChiralJets(zero_vec, chiral_d(e.scalar, n, 0))
        return GradedJets(1, jet_const(0.0, p - 1, nv), section)
    if e.degree == 1:
        div = weighted_divergence(e.section.vec, f_jet)
        scalar = e.scalar.truncate(p - 1) - div * 0.5
        zero_vec = jet_zeros((n,), p - 1, nv)
        section = ChiralJets(zero_vec, chiral_d(e.scalar, n, 0))
        return GradedJets(2, scalar, section)
    if e.degree == 2:
        div = weighted_divergence(e.section.vec, f_jet)
        return GradedJets(3, div * 0.5, None)
    raise DataError("degree 3 has no differential image")


def q_diff(e: GradedElement, chart: Chart, point, order: int) -> GradedJets:
    """Evaluate the element and apply the differential."""
    if order < 2:
        raise DataError("the differential needs jet order >= 2")
    f_jet = chart.eval_jet(chart.volume_exponent, point, order)
    return q_jets(eval_element(e, chart, point, order), f_jet)


def b_jets(e: GradedJets) -> GradedJets:
    """Degree -1 operator at jet level; exact, keeps the order.

    degree 1: (f, A) -> f; degree 2: (f, A) -> (0, -A);
    degree 3: f -> (-f, 0); degree 0 has no image.
    """
    n = e.n
    p = e.scalar.order
    nv = e.scalar.num_vars
    if e.degree == 1:
        return GradedJets(0, e.scalar, None)
    if e.degree == 2:
        section = ChiralJets(-e.section.vec, -e.section.form)
        return GradedJets(1, jet_const(0.0, p, nv), section)
    if e.degree == 3:
        section = ChiralJets(jet_zeros((n,), p, nv), jet_zeros((n,), p, nv))
        return GradedJets(2, -e.scalar, section)
    raise DataError("degree 0 has no contraction image")


def b_op(e: GradedElement) -> GradedElement:
    """Degree -1 operator at expression level."""
    if e.degree == 1:
        return GradedElement(0, e.scalar, dim=e.dim)
    if e.degree == 2:
        section = ChiralSection(
            tuple(Neg(c) for c in e.section.vec),
            tuple(Neg(c) for c in e.section.form),
        )
        return GradedElement(1, ZERO, section)
    if e.degree == 3:
        z = (ZERO,) * e.dim
        return GradedElement(2, Neg(e.scalar), ChiralSection(z, z))
    raise DataError("degree 0 has no contraction image")


def _scale_section(a: ChiralJets, s: Jet) -> ChiralJets:
    n = a.n
    vec = np.empty(n, dtype=object)
    form = np.empty(n, dtype=object)
    for k in range(n):
        vec[k] = s * a.vec[k]
        form[k] = s * a.form[k]
    return ChiralJets(vec, form)


def m0(a1: GradedElement, a2: GradedElement, chart: Chart, point, order: int) -> Jet:
    """First homotopy of commutativity: the symmetric pairing of sections.

    Nonzero only when both arguments have degree 1; the value is
    +<A1, A2> in the symmetric normalization.
    """
    if a1.degree != 1 or a2.degree != 1:
        return jet_const(0.0, order, 2 * chart.dim)
    s1 = eval_element(a1, chart, point, order).section
    s2 = eval_element(a2, chart, point, order).section
    return pairing_half(s1, s2)


def n0(
    a1: GradedElement,
    a2: GradedElement,
    a3: GradedElement,
    chart: Chart,
    point,
    order: int,
) -> GradedJets:
    """First homotopy of associativity.

    On three degree-1 elements: A1 <A2,A3> - A2 <A1,A3> in the symmetric
    normalization; with a degree-2 element in one of the first two slots
    and degree-1 elements elsewhere: +section(deg-2) <A1,A2>.  All other
    patterns vanish.  Only section parts participate.
    """
    degs = (a1.degree, a2.degree, a3.degree)
    out_deg = sum(degs) - 2
    if not 0 <= out_deg <= 3:
        raise DataError("combined degree falls outside the complex")
    nv = 2 * chart.dim

    if degs == (1, 1, 1):
        s1 = eval_element(a1, chart, point, order).section
        s2 = eval_element(a2, chart, point, order).section
        s3 = eval_element(a3, chart, point, order).section
        p13 = pairing_half(s1, s3)
        p23 = pairing_half(s2, s3)
        section = ChiralJets(
            p23 * s1.vec - p13 * s2.vec, p23 * s1.form - p13 * s2.form
        )
        return GradedJets(1, jet_const(0.0, order, nv), section)

    if sorted(degs[:2]) == [1, 2] and degs[2] == 1:
        tilde = a1 if a1.degree == 2 else a2
        first, second = (a2, a3) if a1.degree == 2 else (a1, a3)
        sv = eval_element(tilde, chart, point, order).section
        sa = eval_element(first, chart, point, order).section
        sb = eval_element(second, chart, point, order).section
        weight = pairing_half(sa, sb)
        return GradedJets(2, jet_const(0.0, order, nv), _scale_section(sv, weight))

    zero_sec = None
    if out_deg in (1, 2):
        z = jet_zeros((chart.dim,), order, nv)
        zero_sec = ChiralJets(z, z.copy())
    return GradedJets(out_deg, jet_const(0.0, order, nv), zero_sec)


def complex_residuals(chart: Chart, elements, point, order: int) -> dict:
    """Nilpotency and anticommutation residuals over a batch of elements.

    Checks Q^2 = 0 on degrees 0 and 1, Qb + bQ = 0 on degrees 1 and 2,
    and b^2 = 0 on degrees 2 and 3; residuals are coefficientwise.
    """
    if order < 2:
        raise DataError("complex checks need jet order >= 2")
    f_jet = chart.eval_jet(chart.volume_exponent, point, order)
    q_square = 0.0
    anticommute = 0.0
    b_square = 0.0
    for e in elements:
        ej = eval_element(e, chart, point, order)
        if e.degree <= 1:
            r = q_jets(q_jets(ej, f_jet), f_jet)
            q_square = max(q_square, r.max_abs())
        if e.degree in (1, 2):
            s = q_jets(b_jets(ej), f_jet) + b_jets(q_jets(ej, f_jet))
            anticommute = max(anticommute, s.max_abs())
        if e.degree >= 2:
            b_square = max(b_square, b_jets(b_jets(ej)).max_abs())
    worst = max(q_square, anticommute, b_square)
    return {
        "q_square": q_square,
        "anticommute": anticommute,
        "b_square": b_square,
        "max_residual": worst,
    }
