"""Beltrami-Courant differential: block calculus, symmetry action, and
the induced metric/two-form background.

The structure tensor M couples the holomorphic generalized tangent
bundle to the antiholomorphic one.  Blocks are stored as (n, n) arrays
indexed [holomorphic slot, antiholomorphic slot]:

    g[i, j]     bivector component   g^{i jbar}
    mu[i, j]    Beltrami component   mu^i_{jbar}
    mubar[i, j] conjugate component  mubar^{jbar}_i
    b[i, j]     two-form component   b_{i jbar}

A generalized vector acts on M through delta_M = -D(alpha) + phi1 +
phi2; the same action pushes forward to the metric G and two-form B via
the quadratic background map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cgeom import (
    Chart,
    ChiralJets,
    DataError,
    SectionE,
    SectionJets,
    eval_section,
    exterior_derivative_jets,
    lie_derivative_jets,
)
from .courant import chiral_d, dorfman_half, pairing_half, vec_apply
from .fieldlang import Expr
from .jets import (
    Jet,
    array_truncate,
    array_values,
    invert_jet_matrix,
    jet_const,
    jet_var,
    jet_zeros,
)


class BeltramiField:
    """Expression-level structure tensor; blocks parse like TensorField."""

    def __init__(self, g, mu, mubar, b, dim: int, chart: Chart | None = None):
        def conv(block):
            arr = np.empty((dim, dim), dtype=object)
            src = np.asarray(block, dtype=object)
            if src.shape != (dim, dim):
                raise DataError(f"block must be {dim}x{dim}, got {src.shape}")
            for idx in np.ndindex(dim, dim):
                item = src[idx]
                if isinstance(item, str):
                    if chart is None:
                        raise DataError("string components require a chart")
                    item = chart.parse(item)
                arr[idx] = item
            return arr

        self.dim = dim
        self.g = conv(g)
        self.mu = conv(mu)
        self.mubar = conv(mubar)
        self.b = conv(b)

    def eval_jets(self, chart: Chart, point, order: int) -> "MJets":
        return MJets(
            chart.eval_array(self.g, point, order),
            chart.eval_array(self.mu, point, order),
            chart.eval_array(self.mubar, point, order),
            chart.eval_array(self.b, point, order),
        )


@dataclass
class MJets:
    """Evaluated structure tensor: four (n, n) arrays of jets."""

    g: np.ndarray
    mu: np.ndarray
    mubar: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def order(self) -> int:
        return self.g[0, 0].order

    def blocks(self):
        return (("g", self.g), ("mu", self.mu), ("mubar", self.mubar), ("b", self.b))

    def truncate(self, order: int) -> "MJets":
        return MJets(*(array_truncate(arr, order) for _, arr in self.blocks()))

    def __add__(self, other: "MJets") -> "MJets":
        p = min(self.order, other.order)
        a, b = self.truncate(p), other.truncate(p)
        return MJets(a.g + b.g, a.mu + b.mu, a.mubar + b.mubar, a.b + b.b)

    def __sub__(self, other: "MJets") -> "MJets":
        return self + other.scale(-1.0)

    def scale(self, c) -> "MJets":
        return MJets(self.g * c, self.mu * c, self.mubar * c, self.b * c)

    def max_abs_value(self) -> float:
        return max(
            float(np.max(np.abs(array_values(arr)))) for _, arr in self.blocks()
        )

    @staticmethod
    def zero(n: int, order: int, num_vars: int) -> "MJets":
        return MJets(*(jet_zeros((n, n), order, num_vars) for _ in range(4)))


def d_op(alpha: SectionJets) -> MJets:
    """First-order piece of the Beltrami-Courant differential on a section.

    The g block vanishes; mu and mubar pick up the off-chirality
    derivatives of the vector parts, and b the antisymmetrized
    derivatives of the one-form parts.
    """
    n = alpha.n
    p = alpha.hol.vec[0].order
    num_vars = alpha.hol.vec[0].num_vars
    out = MJets.zero(n, p - 1, num_vars)
    for i in range(n):
        for j in range(n):
            out.mu[i, j] = alpha.hol.vec[i].derivative(n + j)
            out.mubar[i, j] = alpha.anti.vec[j].derivative(i)
            out.b[i, j] = alpha.anti.form[j].derivative(i) - alpha.hol.form[i].derivative(n + j)
    return out


def phi1(alpha: SectionJets, m: MJets) -> MJets:
    """Transport part of the symmetry action: the Dorfman bracket of the
    section with each chiral column/row of M, the other slot riding.

    The holomorphic channel receives the section through the chirality
    twist (v, omega) -> (v, -omega), the same one-sided sign that the
    derivative operator carries in its two-form slot.  Vector parts are
    untouched, so transport terms are the plain bracket; only the
    interior-product coupling of omega flips.
    """
    n = m.n
    p = min(alpha.hol.vec[0].order, m.order)
    num_vars = m.g[0, 0].num_vars
    out = MJets.zero(n, p - 1, num_vars)
    hol_tw = ChiralJets(alpha.hol.vec, -alpha.hol.form)
    for j in range(n):
        br = dorfman_half(hol_tw, ChiralJets(m.g[:, j], m.mubar[:, j]), 0)
        for i in range(n):
            out.g[i, j] = out.g[i, j] + br.vec[i]
            out.mubar[i, j] = out.mubar[i, j] + br.form[i]
        br = dorfman_half(hol_tw, ChiralJets(m.mu[:, j], m.b[:, j]), 0)
        for i in range(n):
            out.mu[i, j] = out.mu[i, j] + br.vec[i]
            out.b[i, j] = out.b[i, j] + br.form[i]
    for i in range(n):
        br = dorfman_half(alpha.anti, ChiralJets(m.g[i, :], m.mu[i, :]), n)
        for j in range(n):
            out.g[i, j] = out.g[i, j] + br.vec[j]
            out.mu[i, j] = out.mu[i, j] + br.form[j]
        br = dorfman_half(alpha.anti, ChiralJets(m.mubar[i, :], m.b[i, :]), n)
        for j in range(n):
            out.mubar[i, j] = out.mubar[i, j] + br.vec[j]
            out.b[i, j] = out.b[i, j] + br.form[j]
    return out


def _mdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    p = min(a[0, 0].order, b[0, 0].order)
    at = array_truncate(a, p)
    bt = array_truncate(b, p)
    m, k = at.shape
    k2, r = bt.shape
    out = np.empty((m, r), dtype=object)
    for i in range(m):
        for j in range(r):
            acc = at[i, 0] * bt[0, j]
            for s in range(1, k):
                acc = acc + at[i, s] * bt[s, j]
            out[i, j] = acc
    return out


def _endo_matrix(m: MJets) -> np.ndarray:
    # map from the anti half (vbar, wbar) into the hol half (v, w)
    top = np.concatenate([m.mu, m.g], axis=1)
    bot = np.concatenate([m.b, m.mubar], axis=1)
    return np.concatenate([top, bot], axis=0)


def _coendo_matrix(m: MJets) -> np.ndarray:
    # transpose-coupling map from the hol half into the anti half
    top = np.concatenate([m.mubar.T, m.g.T], axis=1)
    bot = np.concatenate([m.b.T, m.mu.T], axis=1)
    return np.concatenate([top, bot], axis=0)


def phi2(d_alpha: MJets, m: MJets) -> MJets:
    """Quadratic part of the symmetry action: sandwich the first-order
    differential between two copies of M (endomorphism composition)."""
    n = m.n
    prod = _mdot(_mdot(_endo_matrix(m), _coendo_matrix(d_alpha)), _endo_matrix(m))
    return MJets(
        prod[:n, n:], prod[:n, :n], prod[n:, n:], prod[n:, :n]
    )


def delta_m(alpha: SectionJets, m: MJets) -> MJets:
    """Symmetry variation of M along a generalized vector."""
    d_alpha = d_op(alpha)
    return phi1(alpha, m) + phi2(d_alpha, m) - d_alpha


def phi2_jet_form(
    chart: Chart,
    point,
    order: int,
    m_factors: Sequence[tuple[tuple, tuple]],
    hol_factors: Sequence[tuple[tuple, "Expr | str"]],
    anti_factors: Sequence[tuple["Expr | str", tuple]],
) -> MJets:
    """Rank-decomposed contraction form of the quadratic action.

    `m_factors` lists pairs (hol piece, anti piece), each piece a pair of
    component tuples (vector, form); M is the sum of their outer
    products.  `hol_factors` pairs a holomorphic piece with its scalar
    antiholomorphic rider, `anti_factors` the mirror image; the section
    is the sum of rider-weighted pieces.  Components of each piece must
    depend only on its own chirality's coordinates.

    Output blocks follow the same storage convention as MJets.
    """
    n = chart.dim

    def eval_piece(vec_form) -> ChiralJets:
        vec, form = vec_form
        conv = lambda c: chart.parse(c) if isinstance(c, str) else c
        vecs = np.array([chart.eval_jet(conv(c), point, order) for c in vec], dtype=object)
        forms = np.array([chart.eval_jet(conv(c), point, order) for c in form], dtype=object)
        return ChiralJets(vecs, forms)

    def eval_scalar(expr) -> Jet:
        e = chart.parse(expr) if isinstance(expr, str) else expr
        return chart.eval_jet(e, point, order)

    m_hol = [eval_piece(hf) for hf, _ in m_factors]
    m_anti = [eval_piece(af) for _, af in m_factors]
    a_hol = [(eval_piece(piece), eval_scalar(rider)) for piece, rider in hol_factors]
    a_anti = [(eval_scalar(rider), eval_piece(piece)) for rider, piece in anti_factors]

    sample = m_hol[0].vec[0] if m_hol else a_hol[0][0].vec[0]
    out = MJets.zero(n, order - 1, sample.num_vars)

    def sigma(piece: ChiralJets) -> ChiralJets:
        return ChiralJets(piece.vec, -piece.form)

    def accumulate(scalar: Jet, hol: ChiralJets, anti: ChiralJets) -> None:
        p = out.order
        s = scalar.truncate(p)
        hv = array_truncate(hol.vec, p)
        hf = array_truncate(hol.form, p)
        av = array_truncate(anti.vec, p)
        af = array_truncate(anti.form, p)
        for i in range(n):
            for j in range(n):
                out.g[i, j] = out.g[i, j] + s * hv[i] * av[j]
                out.mu[i, j] = out.mu[i, j] + s * hv[i] * af[j]
                out.mubar[i, j] = out.mubar[i, j] + s * hf[i] * av[j]
                out.b[i, j] = out.b[i, j] + s * hf[i] * af[j]

    # piece b (x) fbar: contributes <sigma(b), a^K> abar^J(fbar) a^J (x) abar^K
    for piece, fbar in a_hol:
        tw = sigma(piece)
        for k_idx, ak in enumerate(m_hol):
            coupling = pairing_half(tw, ak)
            for j_idx, aj in enumerate(m_hol):
                rider = vec_apply(m_anti[j_idx].vec, fbar, n)
                scalar = coupling.truncate(out.order) * rider.truncate(out.order)
                accumulate(scalar, aj, m_anti[k_idx])
    # piece f (x) bbar: contributes <abar^J, bbar> a^K(f) a^J (x) abar^K
    for f, piece in a_anti:
        for j_idx, aj in enumerate(m_hol):
            coupling = pairing_half(m_anti[j_idx], piece)
            for k_idx, ak in enumerate(m_hol):
                rider = vec_apply(ak.vec, f, 0)
                scalar = coupling.truncate(out.order) * rider.truncate(out.order)
                accumulate(scalar, aj, m_anti[k_idx])
    return out


# --- explicit component formulas (independent verification path) -----------

def component_delta(alpha: SectionJets, m: MJets) -> MJets:
    """Index-level transformation of mu, mubar, and b for vanishing g.

    Written out term by term; serves as the independent cross-check of
    delta_m.  Raises DataError when the g block is nonzero, where these
    displays do not apply.
    """
    n = m.n
    for i in range(n):
        for j in range(n):
            if m.g[i, j].max_abs() != 0.0:
                raise DataError("component formulas require a vanishing g block")
    p = min(alpha.hol.vec[0].order, m.order)
    num_vars = m.g[0, 0].num_vars
    out = MJets.zero(n, p - 1, num_vars)

    v = alpha.hol.vec
    om = alpha.hol.form
    vb = alpha.anti.vec
    omb = alpha.anti.form
    q = p - 1

    def d(jet: Jet, var: int) -> Jet:
        return jet.truncate(q + 1).derivative(var)

    def t(jet: Jet) -> Jet:
        return jet.truncate(q)

    dv = [[d(v[s], k) for k in range(n)] for s in range(n)]        # d_k v^s
    dv_bar = [[d(v[s], n + k) for k in range(n)] for s in range(n)]
    dvb = [[d(vb[s], n + k) for k in range(n)] for s in range(n)]  # d_kbar vbar^s
    dvb_hol = [[d(vb[s], k) for k in range(n)] for s in range(n)]
    dom = [[d(om[s], k) for k in range(n)] for s in range(n)]      # d_k omega_s
    dom_bar = [[d(om[s], n + k) for k in range(n)] for s in range(n)]
    domb = [[d(omb[s], n + k) for k in range(n)] for s in range(n)]
    domb_hol = [[d(omb[s], k) for k in range(n)] for s in range(n)]

    def transport(block_entry: Jet) -> Jet:
        acc = None
        for k in range(n):
            term = t(v[k]) * d(block_entry, k) + t(vb[k]) * d(block_entry, n + k)
            acc = term if acc is None else acc + term
        return acc

    for i in range(n):
        for j in range(n):
            acc = -dv_bar[i][j] + transport(m.mu[i, j])
            for k in range(n):
                acc = acc + t(m.mu[i, k]) * dvb[k][j]
                acc = acc - t(m.mu[k, j]) * dv[i][k]
                for l in range(n):
                    acc = acc + t(m.mu[i, l]) * t(m.mu[k, j]) * dvb_hol[l][k]
            out.mu[i, j] = acc

            acc = -dvb_hol[j][i] + transport(m.mubar[i, j])
            for k in range(n):
                acc = acc + t(m.mubar[k, j]) * dv[k][i]
                acc = acc - t(m.mubar[i, k]) * dvb[j][k]
                for l in range(n):
                    acc = acc + t(m.mubar[l, j]) * t(m.mubar[i, k]) * dv_bar[l][k]
            out.mubar[i, j] = acc

            acc = transport(m.b[i, j]) + dom_bar[i][j] - domb_hol[j][i]
            for k in range(n):
                acc = acc + t(m.b[i, k]) * dvb[k][j]
                acc = acc + t(m.b[k, j]) * dv[k][i]
                acc = acc + t(m.mu[k, j]) * (dom[i][k] - dom[k][i])
                acc = acc + t(m.mubar[i, k]) * (domb[k][j] - domb[j][k])
                for l in range(n):
                    acc = acc + t(m.b[i, l]) * t(m.mu[k, j]) * dvb_hol[l][k]
                    acc = acc + t(m.b[k, j]) * t(m.mubar[i, l]) * dv_bar[k][l]
                    acc = acc + t(m.mubar[i, l]) * t(m.mu[k, j]) * (
                        domb_hol[l][k] - dom_bar[k][l]
                    )
            out.b[i, j] = acc
    return out


# --- background map ---------------------------------------------------------

@dataclass
class Background:
    """Realified metric and two-form produced by the background map."""

    G: np.ndarray
    B: np.ndarray

    @property
    def n(self) -> int:
        return self.G.shape[0] // 2


def gb_map(m: MJets) -> Background:
    """Quadratic map from the structure tensor to the sigma-model
    background (G, B) on the realified 2n-dimensional chart.

    The g block must be invertible at the base point.  G comes out
    symmetric and B antisymmetric by construction.
    """
    n = m.n
    ginv = invert_jet_matrix(m.g)  # ginv[j, i]: lower metric g_{i jbar} = ginv[j, i]
    glow = ginv.T  # glow[i, j] = g_{i jbar}, stored [hol, anti] like the blocks
    mb = m.mubar
    mu = m.mu

    quad = np.empty((n, n), dtype=object)
    for s in range(n):
        for k in range(n):
            acc = None
            for j in range(n):
                for l in range(n):
                    term = glow[j, l] * mb[s, l] * mu[j, k]
                    acc = term if acc is None else acc + term
            quad[s, k] = acc

    g_mix = quad + glow - m.b
    b_mix = quad - glow - m.b

    g_hol = np.empty((n, n), dtype=object)
    b_hol = np.empty((n, n), dtype=object)
    g_anti = np.empty((n, n), dtype=object)
    b_anti = np.empty((n, n), dtype=object)
    for s in range(n):
        for i in range(n):
            acc_si = None
            acc_is = None
            for j in range(n):
                t1 = glow[i, j] * mb[s, j]
                t2 = glow[s, j] * mb[i, j]
                acc_si = t1 if acc_si is None else acc_si + t1
                acc_is = t2 if acc_is is None else acc_is + t2
            g_hol[s, i] = -acc_si - acc_is
            b_hol[s, i] = acc_is - acc_si
            acc_si = None
            acc_is = None
            for j in range(n):
                t1 = glow[j, s] * mu[j, i]
                t2 = glow[j, i] * mu[j, s]
                acc_si = t1 if acc_si is None else acc_si + t1
                acc_is = t2 if acc_is is None else acc_is + t2
            g_anti[s, i] = -acc_si - acc_is
            b_anti[s, i] = acc_is - acc_si

    order = g_mix[0, 0].order
    num_vars = g_mix[0, 0].num_vars
    big_g = jet_zeros((2 * n, 2 * n), order, num_vars)
    big_b = jet_zeros((2 * n, 2 * n), order, num_vars)
    for s in range(n):
        for i in range(n):
            big_g[s, i] = g_hol[s, i]
            big_g[n + s, n + i] = g_anti[s, i]
            big_b[s, i] = b_hol[s, i]
            big_b[n + s, n + i] = b_anti[s, i]
            big_g[s, n + i] = g_mix[s, i]
            big_g[n + i, s] = g_mix[s, i]
            big_b[s, n + i] = b_mix[s, i]
            big_b[n + i, s] = -b_mix[s, i]
    return Background(big_g, big_b)


# --- symmetry equivalence harness -------------------------------------------

def _extend_blocks(m: MJets, order: int, num_vars: int) -> MJets:
    blocks = []
    for _, arr in m.blocks():
        out = np.empty(arr.shape, dtype=object)
        for idx in np.ndindex(*arr.shape):
            out[idx] = arr[idx].truncate(order).extend_vars(num_vars)
        blocks.append(out)
    return MJets(*blocks)


def check_theorem11(
    chart: Chart,
    alpha: SectionE,
    field: BeltramiField,
    points: Sequence[Sequence[complex]],
    order: int = 3,
    tol: float = 1e-8,
) -> dict:
    """Verify that the symmetry variation of M pushes forward through the
    background map to a diffeomorphism plus two-form shift of (G, B).

    The variation is injected as an exact first-order deformation in an
    auxiliary jet variable t; the t-linear coefficients of (G, B) of the
    deformed tensor are compared with (L_w G, L_w B + 2 d eta), where
    w = (v, vbar) and eta = (omega, omegabar) are the realified vector
    and one-form carried by the section.

    Orientation note: with the component transformation formulas taken
    verbatim (delta_m as the increment of M), the induced background flow
    comes out along +w.  The generator of the inverse point flow yields
    the familiar all-minus form of the same statement; the equality is
    checked here in the orientation the component formulas fix.
    """
    n = chart.dim
    if order < 2:
        raise ValueError("the harness needs jet order >= 2")
    worst_g = 0.0
    worst_b = 0.0
    for point in points:
        alpha_j = eval_section(chart, alpha, point, order)
        m_j = field.eval_jets(chart, point, order)
        dm = delta_m(alpha_j, m_j)

        nv = 2 * n + 1
        p = dm.order
        m_ext = _extend_blocks(m_j, p, nv)
        dm_ext = _extend_blocks(dm, p, nv)
        t_jet = jet_var(2 * n, 0.0, p, nv)
        deformed_blocks = []
        for (_, base), (_, delta) in zip(m_ext.blocks(), dm_ext.blocks()):
            out = np.empty(base.shape, dtype=object)
            for idx in np.ndindex(*base.shape):
                out[idx] = base[idx] + t_jet * delta[idx]
            deformed_blocks.append(out)
        bg_t = gb_map(MJets(*deformed_blocks))

        e_t = (0,) * (2 * n) + (1,)
        var_g = np.empty((2 * n, 2 * n), dtype=np.complex128)
        var_b = np.empty((2 * n, 2 * n), dtype=np.complex128)
        for idx in np.ndindex(2 * n, 2 * n):
            var_g[idx] = bg_t.G[idx].coefficient(e_t)
            var_b[idx] = bg_t.B[idx].coefficient(e_t)

        bg0 = gb_map(m_j)
        w = np.empty(2 * n, dtype=object)
        eta = np.empty(2 * n, dtype=object)
        for k in range(n):
            w[k] = alpha_j.hol.vec[k]
            w[n + k] = alpha_j.anti.vec[k]
            eta[k] = alpha_j.hol.form[k]
            eta[n + k] = alpha_j.anti.form[k]
        lie_g = array_values(lie_derivative_jets(w, bg0.G, ("down", "down")))
        lie_b = array_values(lie_derivative_jets(w, bg0.B, ("down", "down")))
        d_eta = array_values(exterior_derivative_jets(eta))

        target_g = lie_g
        target_b = lie_b + 2.0 * d_eta
        worst_g = max(worst_g, float(np.max(np.abs(var_g - target_g))))
        worst_b = max(worst_b, float(np.max(np.abs(var_b - target_b))))
    max_res = max(worst_g, worst_b)
    return {
        "residual_g": worst_g,
        "residual_b": worst_b,
        "max_residual": max_res,
        "tol": tol,
        "passed": bool(max_res <= tol),
    }
