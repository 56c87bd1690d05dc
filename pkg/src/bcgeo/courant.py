"""Chiral Dorfman bracket, canonical pairing, Courant axiom checks, and
the one-parameter vertex algebroid operations whose first-order terms
recover them.

All brackets act separately on the holomorphic and antiholomorphic
halves of a section: derivatives are taken only along the half's own
coordinates, and any dependence on the opposite coordinates rides along
as a spectator.  Operations that differentiate reduce the jet order by
one and truncate their operands to a common order first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .cgeom import (
    Chart,
    ChiralJets,
    ChiralSection,
    SectionE,
    SectionJets,
    eval_chiral,
    eval_section,
)
from .jets import Jet, array_truncate, jet_zeros


def _match(a: ChiralJets, b: ChiralJets) -> tuple[ChiralJets, ChiralJets, int]:
    p = min(a.order, b.order)
    return a.truncate(p), b.truncate(p), p


def chiral_d(f: Jet, n: int, offset: int) -> np.ndarray:
    """Half-exterior derivative of a scalar: the (n,) array of partials."""
    out = np.empty(n, dtype=object)
    for k in range(n):
        out[k] = f.derivative(offset + k)
    return out


def vec_apply(vec: np.ndarray, f: Jet, offset: int) -> Jet:
    """Apply a half-vector to a scalar: sum_k v^k d_k f."""
    n = vec.shape[0]
    p = min(f.order - 1, vec[0].order - 1) + 1  # conservative common order
    acc = None
    for k in range(n):
        term = vec[k].truncate(p - 1) * f.truncate(p).derivative(offset + k)
        acc = term if acc is None else acc + term
    return acc


def dorfman_half(a: ChiralJets, b: ChiralJets, offset: int) -> ChiralJets:
    """Dorfman bracket of one chirality half.

    [(v1,w1),(v2,w2)] = ([v1,v2]_Lie, L_{v1} w2 - i_{v2} d w1), with all
    derivatives restricted to the half's own n coordinates.
    """
    a, b, p = _match(a, b)
    n = a.n
    da_vec = [[a.vec[s].derivative(offset + k) for k in range(n)] for s in range(n)]
    db_vec = [[b.vec[s].derivative(offset + k) for k in range(n)] for s in range(n)]
    da_form = [[a.form[s].derivative(offset + k) for k in range(n)] for s in range(n)]
    db_form = [[b.form[s].derivative(offset + k) for k in range(n)] for s in range(n)]
    av = array_truncate(a.vec, p - 1)
    bv = array_truncate(b.vec, p - 1)
    bf = array_truncate(b.form, p - 1)

    vec = np.empty(n, dtype=object)
    form = np.empty(n, dtype=object)
    for s in range(n):
        acc = None
        for k in range(n):
            term = av[k] * db_vec[s][k] - bv[k] * da_vec[s][k]
            acc = term if acc is None else acc + term
        vec[s] = acc
    for i in range(n):
        acc = None
        for k in range(n):
            term = (
                av[k] * db_form[i][k]
                + bf[k] * da_vec[k][i]
                - bv[k] * (da_form[i][k] - da_form[k][i])
            )
            acc = term if acc is None else acc + term
        form[i] = acc
    return ChiralJets(vec, form)


def pairing_half(a: ChiralJets, b: ChiralJets) -> Jet:
    """Symmetric canonical pairing of one half: sum v1 w2 + v2 w1."""
    a, b, _ = _match(a, b)
    acc = None
    for k in range(a.n):
        term = a.vec[k] * b.form[k] + b.vec[k] * a.form[k]
        acc = term if acc is None else acc + term
    return acc


def dorfman(a: SectionJets, b: SectionJets) -> SectionJets:
    """Full Dorfman bracket: the two halves evolve independently."""
    n = a.n
    return SectionJets(
        dorfman_half(a.hol, b.hol, 0), dorfman_half(a.anti, b.anti, n)
    )


def pairing(a: SectionJets, b: SectionJets) -> Jet:
    hol = pairing_half(a.hol, b.hol)
    anti = pairing_half(a.anti, b.anti)
    p = min(hol.order, anti.order)
    return hol.truncate(p) + anti.truncate(p)


def section_d(f: Jet, n: int) -> SectionJets:
    """Differential into the generalized bundle: vector parts vanish."""
    hol_form = chiral_d(f, n, 0)
    anti_form = chiral_d(f, n, n)
    z = jet_zeros((n,), f.order - 1, f.num_vars)
    return SectionJets(
        ChiralJets(z, hol_form), ChiralJets(z.copy(), anti_form)
    )


# --- Courant axiom verification --------------------------------------------
#
# The checker runs the quasiclassical-limit operations: bracket
# -[.,.]_Dorfman, anchor q -> -v, pairing -<.,.>, differential d.  The
# sign pattern is the one produced by the vertex operations' first-order
# coefficients; the axioms are insensitive to this global convention.

AXIOM_NAMES = (
    "leibniz_jacobi",
    "anchor_morphism",
    "function_leibniz",
    "symmetrization",
    "pairing_invariance",
    "anchor_kills_d",
)


def _half_axiom_residuals(
    sections: Sequence[ChiralJets],
    functions: Sequence[Jet],
    offset: int,
) -> dict[str, float]:
    n = sections[0].n
    num_vars = sections[0].vec[0].num_vars

    def br(x: ChiralJets, y: ChiralJets) -> ChiralJets:
        return -dorfman_half(x, y, offset)

    def pr(x: ChiralJets, y: ChiralJets) -> Jet:
        return -pairing_half(x, y)

    def anchor(x: ChiralJets, f: Jet) -> Jet:
        return -vec_apply(x.vec, f, offset)

    def dd(f: Jet) -> ChiralJets:
        return ChiralJets(
            jet_zeros((n,), f.order - 1, num_vars), chiral_d(f, n, offset)
        )

    def scale(f: Jet, x: ChiralJets) -> ChiralJets:
        p = min(f.order, x.order)
        ft = f.truncate(p)
        xt = x.truncate(p)
        return ChiralJets(xt.vec * ft, xt.form * ft)

    def sec_res(x: ChiralJets, y: ChiralJets) -> float:
        p = min(x.order, y.order)
        return (x.truncate(p) - y.truncate(p)).max_abs_value()

    def jet_res(x: Jet, y: Jet) -> float:
        p = min(x.order, y.order)
        return (x.truncate(p) - y.truncate(p)).max_abs()

    a, b, c = sections[0], sections[1], sections[2]
    f, g = functions[0], functions[1]
    res: dict[str, float] = {}

    res["leibniz_jacobi"] = sec_res(br(a, br(b, c)), br(br(a, b), c) + br(b, br(a, c)))
    lhs = anchor(br(a, b), f)
    rhs = anchor(a, anchor(b, f)) - anchor(b, anchor(a, f))
    res["anchor_morphism"] = jet_res(lhs, rhs)
    lhs_s = br(a, scale(f, b))
    rhs_s = scale(f, br(a, b)) + scale(anchor(a, f), b)
    res["function_leibniz"] = sec_res(lhs_s, rhs_s)
    res["symmetrization"] = sec_res(br(a, b) + br(b, a), dd(pr(a, b)))
    lhs_p = anchor(a, pr(b, c))
    pc = pr(br(a, b), c)
    pb = pr(b, br(a, c))
    pmin = min(pc.order, pb.order)
    res["pairing_invariance"] = jet_res(lhs_p, pc.truncate(pmin) + pb.truncate(pmin))
    res["anchor_kills_d"] = max(
        anchor(dd(f), g).max_abs(), abs(pr(dd(f), dd(g)).value)
    )
    return res


def check_courant_axioms(
    chart: Chart,
    sections: Sequence[SectionE],
    functions: Sequence,
    points: Sequence[Sequence[complex]],
    order: int = 3,
    tol: float = 1e-9,
) -> dict:
    """Verify the six Courant axioms on both chirality halves.

    Needs at least three sections and two scalar functions; residuals
    are maximized over all points and both halves.
    """
    if len(sections) < 3 or len(functions) < 2:
        raise ValueError("need at least 3 sections and 2 functions")
    if order < 2:
        raise ValueError("axiom checks require jet order >= 2")
    exprs = [chart.parse(f) if isinstance(f, str) else f for f in functions]
    worst = {name: 0.0 for name in AXIOM_NAMES}
    n = chart.dim
    for point in points:
        secs = [eval_section(chart, s, point, order) for s in sections]
        fns = [chart.eval_jet(e, point, order) for e in exprs]
        for trip in _triples(len(secs)):
            chosen = [secs[t] for t in trip]
            for offset, half in ((0, "hol"), (n, "anti")):
                halves = [getattr(s, half) for s in chosen]
                res = _half_axiom_residuals(halves, fns[:2], offset)
                for k, v in res.items():
                    worst[k] = max(worst[k], v)
    max_res = max(worst.values())
    return {
        "residuals": worst,
        "max_residual": max_res,
        "tol": tol,
        "passed": bool(max_res <= tol),
    }


def _triples(count: int):
    # a light deterministic selection: consecutive triples wrap around
    if count == 3:
        return [(0, 1, 2)]
    return [tuple((s + j) % count for j in range(3)) for s in range(count)]


# --- vertex algebroid operations over C[h] ---------------------------------

@dataclass
class HScalar:
    """Polynomial in the formal parameter h with scalar jet coefficients."""

    coeffs: list

    def coeff(self, k: int):
        return self.coeffs[k] if k < len(self.coeffs) else None

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "HScalar") -> "HScalar":
        out = []
        for k in range(max(len(self.coeffs), len(other.coeffs))):
            x = self.coeff(k)
            y = other.coeff(k)
            out.append(_jet_add(x, y))
        return HScalar(out)

    def __sub__(self, other: "HScalar") -> "HScalar":
        return self + other.scale(-1.0)

    def scale(self, c) -> "HScalar":
        return HScalar([x * c if x is not None else None for x in self.coeffs])

    def shift(self, k: int) -> "HScalar":
        return HScalar([None] * k + list(self.coeffs))

    def max_abs_value(self) -> float:
        vals = [abs(x.value) for x in self.coeffs if x is not None]
        return max(vals) if vals else 0.0


@dataclass
class HSection:
    """Polynomial in h with chirality-half section coefficients."""

    coeffs: list

    def coeff(self, k: int):
        return self.coeffs[k] if k < len(self.coeffs) else None

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "HSection") -> "HSection":
        out = []
        for k in range(max(len(self.coeffs), len(other.coeffs))):
            out.append(_sec_add(self.coeff(k), other.coeff(k)))
        return HSection(out)

    def __sub__(self, other: "HSection") -> "HSection":
        return self + other.scale(-1.0)

    def scale(self, c) -> "HSection":
        return HSection([x.scale(c) if x is not None else None for x in self.coeffs])

    def shift(self, k: int) -> "HSection":
        return HSection([None] * k + list(self.coeffs))

    def max_abs_value(self) -> float:
        vals = [x.max_abs_value() for x in self.coeffs if x is not None]
        return max(vals) if vals else 0.0


def _jet_add(x, y):
    if x is None:
        return y
    if y is None:
        return x
    p = min(x.order, y.order)
    return x.truncate(p) + y.truncate(p)


def _sec_add(x, y):
    if x is None:
        return y
    if y is None:
        return x
    p = min(x.order, y.order)
    return x.truncate(p) + y.truncate(p)


def _sec_scale_jet(x: ChiralJets, f: Jet) -> ChiralJets:
    p = min(x.order, f.order)
    ft = f.truncate(p)
    xt = x.truncate(p)
    return ChiralJets(xt.vec * ft, xt.form * ft)


def vx_bracket(a: ChiralJets, b: ChiralJets, offset: int) -> HSection:
    """Vertex bracket of two weight-one elements.

    The h-linear term is minus the Dorfman bracket; vector-vector input
    adds an h^2 one-form correction built from second derivatives.
    """
    a, b, p = _match(a, b)
    n = a.n
    h1 = -dorfman_half(a, b, offset)
    if p >= 2:
        form = np.empty(n, dtype=object)
        for i in range(n):
            acc = None
            for k in range(n):
                for s in range(n):
                    term = (
                        a.vec[s].derivative(offset + i).derivative(offset + k)
                        * b.vec[k].derivative(offset + s).truncate(p - 2)
                    )
                    acc = term if acc is None else acc + term
            form[i] = -acc
        h2 = ChiralJets(jet_zeros((n,), p - 2, a.vec[0].num_vars), form)
        return HSection([None, h1, h2])
    return HSection([None, h1])


def vx_pairing(a: ChiralJets, b: ChiralJets, offset: int) -> HScalar:
    """Vertex pairing: -h <a,b> plus an h^2 double-derivative scalar."""
    a, b, p = _match(a, b)
    n = a.n
    h1 = -pairing_half(a, b)
    if p >= 1:
        acc = None
        for i in range(n):
            for j in range(n):
                term = a.vec[i].derivative(offset + j) * b.vec[j].derivative(offset + i)
                acc = term if acc is None else acc + term
        return HScalar([None, h1, -acc])
    return HScalar([None, h1])


def vx_anchor(a: ChiralJets, f: Jet, offset: int) -> HScalar:
    """Anchor action on a function: -h v(f)."""
    return HScalar([None, -vec_apply(a.vec, f, offset)])


def vx_del(f: Jet, n: int, offset: int) -> HSection:
    """Differential: the one-form df at h^0."""
    z = jet_zeros((n,), f.order - 1, f.num_vars)
    return HSection([ChiralJets(z, chiral_d(f, n, offset))])


def vx_star(f: Jet, a: ChiralJets, offset: int) -> HSection:
    """Module action of a function: f.a plus an h one-form correction."""
    n = a.n
    p = min(f.order, a.order)
    h0 = _sec_scale_jet(a, f)
    if p >= 2:
        form = np.empty(n, dtype=object)
        for i in range(n):
            acc = None
            for j in range(n):
                term = (
                    f.derivative(offset + i).derivative(offset + j)
                    * a.vec[j].truncate(p - 2)
                )
                acc = term if acc is None else acc + term
            form[i] = acc
        h1 = ChiralJets(jet_zeros((n,), p - 2, f.num_vars), form)
        return HSection([h0, h1])
    return HSection([h0])


def vx_bracket_h(a: HSection, b: HSection, offset: int) -> HSection:
    """C[h]-bilinear extension of the vertex bracket."""
    out = HSection([])
    for i, x in enumerate(a.coeffs):
        if x is None:
            continue
        for j, y in enumerate(b.coeffs):
            if y is None:
                continue
            out = out + vx_bracket(x, y, offset).shift(i + j)
    return out


def quasiclassical_limit(poly):
    """First-order coefficient in h, the classical shadow of the operation."""
    return poly.coeff(1)


def check_vertex_leibniz(
    chart: Chart,
    triples: Sequence[tuple[ChiralSection, ChiralSection, ChiralSection]],
    points: Sequence[Sequence[complex]],
    order: int = 3,
    which_half: str = "hol",
) -> dict:
    """Residual of [a,[b,c]] = [[a,b],c] + [b,[a,c]] for the vertex bracket,
    checked coefficientwise in h."""
    offset = 0 if which_half == "hol" else chart.dim
    worst = 0.0
    for point in points:
        for a_s, b_s, c_s in triples:
            a = eval_chiral(chart, a_s, point, order)
            b = eval_chiral(chart, b_s, point, order)
            c = eval_chiral(chart, c_s, point, order)
            ha = HSection([a])
            hb = HSection([b])
            hc = HSection([c])
            lhs = vx_bracket_h(ha, vx_bracket_h(hb, hc, offset), offset)
            rhs = vx_bracket_h(vx_bracket_h(ha, hb, offset), hc, offset) + vx_bracket_h(
                hb, vx_bracket_h(ha, hc, offset), offset
            )
            worst = max(worst, (lhs - rhs).max_abs_value())
    return {"max_residual": worst}


def check_quasiclassical(
    chart: Chart,
    sections: Sequence[ChiralSection],
    functions: Sequence,
    points: Sequence[Sequence[complex]],
    order: int = 3,
    which_half: str = "hol",
) -> dict:
    """The h-linear coefficients of the vertex operations must equal the
    negated Dorfman bracket, pairing, and anchor; h^0 terms of the
    bracket and pairing must vanish."""
    offset = 0 if which_half == "hol" else chart.dim
    n = chart.dim
    exprs = [chart.parse(f) if isinstance(f, str) else f for f in functions]
    worst_limit = 0.0
    worst_low = 0.0
    for point in points:
        halves = [eval_chiral(chart, s, point, order) for s in sections]
        fns = [chart.eval_jet(e, point, order) for e in exprs]
        for idx in range(len(halves)):
            a = halves[idx]
            b = halves[(idx + 1) % len(halves)]
            br = vx_bracket(a, b, offset)
            target = -dorfman_half(a, b, offset)
            worst_limit = max(
                worst_limit, (quasiclassical_limit(br) - target).max_abs_value()
            )
            if br.coeff(0) is not None:
                worst_low = max(worst_low, br.coeff(0).max_abs_value())
            pr = vx_pairing(a, b, offset)
            tgt = -pairing_half(a, b)
            diff = _jet_add(quasiclassical_limit(pr), -tgt)
            worst_limit = max(worst_limit, abs(diff.value))
            if pr.coeff(0) is not None:
                worst_low = max(worst_low, abs(pr.coeff(0).value))
            for f in fns:
                an = vx_anchor(a, f, offset)
                tgt_j = -vec_apply(a.vec, f, offset)
                worst_limit = max(
                    worst_limit, abs(_jet_add(quasiclassical_limit(an), -tgt_j).value)
                )
    return {"limit_residual": worst_limit, "low_order_residual": worst_low,
            "max_residual": max(worst_limit, worst_low)}
