"""Bivector gravity layer: the symmetric second-order bracket, weighted
divergences, the flow constraints on a Hermitian bivector, the induced
metric/two-form/dilaton background, and the residuals of the associated
Einstein-type system together with an equivalence harness.

Index bookkeeping follows cgeom: realified slots order the holomorphic
directions 0..n-1 and the antiholomorphic ones n..2n-1.

Curvature conventions (documented constants of this module): Christoffel
symbols are the symmetric Levi-Civita ones; the Riemann tensor is
R^r_{s mu nu} = d_mu Gamma^r_{nu s} - d_nu Gamma^r_{mu s}
             + Gamma^r_{mu l} Gamma^l_{nu s} - Gamma^r_{nu l} Gamma^l_{mu s};
Ricci contracts the first and third slots, R_{s nu} = R^r_{s r nu}.  With
these choices the mixed Ricci block of a Kahler metric reproduces
-d_i d_jbar log det of the lower Hermitian block, which ties the sign to
the curvature identity checked in ricci_kahler_identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cgeom import (
    Chart,
    DataError,
    IndexType,
    TensorField,
    lie_derivative_jets,
    realify,
)
from .jets import (
    Jet,
    JetDomainError,
    array_derivative,
    array_truncate,
    array_values,
    invert_jet_matrix,
    jet_log,
    jet_zeros,
)

BIVECTOR_SIGNATURE = (IndexType.HOL_UP, IndexType.ANTI_UP)


class HermitianData:
    """Hermitian bivector data {g^{i jbar}} on a weighted chart.

    The chart's volume exponent f doubles as the dilaton seed through
    phi0 = -f/2; admissible data has pluriharmonic f, so the mixed
    Hessian of phi0 vanishes.
    """

    def __init__(self, chart: Chart, g):
        self.chart = chart
        self.n = chart.dim
        if not isinstance(g, TensorField):
            g = TensorField(BIVECTOR_SIGNATURE, g, chart.dim, chart)
        if g.signature != BIVECTOR_SIGNATURE:
            raise DataError("bivector must carry (hol-up, anti-up) indices")
        if g.dim != chart.dim:
            raise DataError("bivector dimension does not match the chart")
        self.g = g

    def g_jets(self, point, order: int) -> np.ndarray:
        return self.g.eval_jets(self.chart, point, order)

    def f_jet(self, point, order: int) -> Jet:
        return self.chart.eval_jet(self.chart.volume_exponent, point, order)

    def phi0_jet(self, point, order: int) -> Jet:
        return self.f_jet(point, order) * (-0.5)

    def phi0_mixed_hessian(self, point) -> float:
        """Largest |d_i d_jbar phi0| at the point; zero when admissible."""
        jet = self.phi0_jet(point, 2)
        n = self.n
        worst = 0.0
        for i in range(n):
            for j in range(n):
                alpha = [0] * (2 * n)
                alpha[i] += 1
                alpha[n + j] += 1
                worst = max(worst, abs(jet.partial(alpha)))
        return worst

    def validate(self, points, tol: float = 1e-9) -> None:
        for pt in points:
            dev = self.phi0_mixed_hessian(pt)
            if dev > tol:
                raise DataError(
                    f"volume exponent is not pluriharmonic: |ddbar phi0| = {dev:.3e}"
                )


# --- second-order bracket ---------------------------------------------------

def double_bracket_jets(gj: np.ndarray, hj: np.ndarray) -> np.ndarray:
    """Symmetric second-order bracket of two (hol-up, anti-up) jet blocks.

    [[g,h]]^{k lbar} = g^{i jbar} d_i d_jbar h^{k lbar}
                     + h^{i jbar} d_i d_jbar g^{k lbar}
                     - d_i g^{k jbar} d_jbar h^{i lbar}
                     - d_i h^{k jbar} d_jbar g^{i lbar}

    The accumulation is grouped so swapping the arguments reproduces the
    exact same float operations; the result drops two jet orders.
    """
    n = gj.shape[0]
    p = min(gj[0, 0].order, hj[0, 0].order)
    if p < 2:
        raise DataError("second-order bracket needs jet order >= 2")
    gj = array_truncate(gj, p)
    hj = array_truncate(hj, p)
    dg = [array_derivative(gj, i) for i in range(n)]
    dh = [array_derivative(hj, i) for i in range(n)]
    ddg = [[array_derivative(dg[i], n + j) for j in range(n)] for i in range(n)]
    ddh = [[array_derivative(dh[i], n + j) for j in range(n)] for i in range(n)]
    g2 = array_truncate(gj, p - 2)
    h2 = array_truncate(hj, p - 2)
    dga = [array_truncate(array_derivative(gj, n + j), p - 2) for j in range(n)]
    dha = [array_truncate(array_derivative(hj, n + j), p - 2) for j in range(n)]
    dg2 = [array_truncate(dg[i], p - 2) for i in range(n)]
    dh2 = [array_truncate(dh[i], p - 2) for i in range(n)]

    out = np.empty((n, n), dtype=object)
    for k in range(n):
        for l in range(n):
            acc = None
            for i in range(n):
                for j in range(n):
                    transport = g2[i, j] * ddh[i][j][k, l] + h2[i, j] * ddg[i][j][k, l]
                    gradient = dg2[i][k, j] * dha[j][i, l] + dh2[i][k, j] * dga[j][i, l]
                    term = transport - gradient
                    acc = term if acc is None else acc + term
            out[k, l] = acc
    return out


def double_bracket(
    g: TensorField, h: TensorField, chart: Chart, point, order: int
) -> np.ndarray:
    """Evaluate the second-order bracket of two bivector fields at a point."""
    if order < 2:
        raise DataError("second-order bracket needs jet order >= 2")
    gj = g.eval_jets(chart, point, order)
    hj = h.eval_jets(chart, point, order)
    return double_bracket_jets(gj, hj)


def vector_lie_bracket(v: np.ndarray, w: np.ndarray, offset: int) -> np.ndarray:
    """Plain Lie bracket of two vector jets differentiating one chirality.

    [v,w]^k = sum_i v^i d_i w^k - w^i d_i v^k with i running over the
    variable band offset..offset+n-1; the result drops one order.
    """
    n = v.shape[0]
    p = min(v[0].order, w[0].order)
    v1 = array_truncate(v, p - 1)
    w1 = array_truncate(w, p - 1)
    dv = [[v[a].truncate(p).derivative(offset + i) for i in range(n)] for a in range(n)]
    dw = [[w[a].truncate(p).derivative(offset + i) for i in range(n)] for a in range(n)]
    out = np.empty(n, dtype=object)
    for k in range(n):
        acc = None
        for i in range(n):
            term = v1[i] * dw[k][i] - w1[i] * dv[k][i]
            acc = term if acc is None else acc + term
        out[k] = acc
    return out


def double_bracket_jet_form(g_pairs, h_pairs) -> np.ndarray:
    """Second-order bracket of rank-decomposed bivectors.

    Each argument is a list of (hol, anti) vector-jet pairs decomposing the
    bivector as sum_I v_I (x) vbar_I with chirally split factors: the hol
    vectors depend on z only, the anti ones on zbar only.  Then the bracket
    collapses to sum_{I,J} [v_I, w_J] (x) [vbar_I, wbar_J] of plain Lie
    brackets, one chirality band each.
    """
    n = g_pairs[0][0].shape[0]
    out = None
    for v_hol, v_anti in g_pairs:
        for w_hol, w_anti in h_pairs:
            bh = vector_lie_bracket(v_hol, w_hol, 0)
            ba = vector_lie_bracket(v_anti, w_anti, n)
            block = np.empty((n, n), dtype=object)
            for k in range(n):
                for l in range(n):
                    block[k, l] = bh[k] * ba[l]
            out = block if out is None else out + block
    return out


# --- weighted divergences ---------------------------------------------------

def divergence_g(data: HermitianData, point, order: int):
    """Weighted divergence of the bivector, one vector per chirality.

    (div g)^i    = sum_j d_jbar g^{i jbar} + (d_jbar f) g^{i jbar}
    (div g)^jbar = sum_i d_i    g^{i jbar} + (d_i f)    g^{i jbar}

    Returns (hol, anti) jet vectors one order below the input order.
    """
    if order < 1:
        raise DataError("divergence needs jet order >= 1")
    n = data.n
    gj = data.g_jets(point, order)
    fj = data.f_jet(point, order)
    g1 = array_truncate(gj, order - 1)
    df = [fj.derivative(v) for v in range(2 * n)]
    dg_hol = [array_derivative(gj, i) for i in range(n)]
    dg_anti = [array_derivative(gj, n + j) for j in range(n)]
    u_hol = np.empty(n, dtype=object)
    u_anti = np.empty(n, dtype=object)
    for i in range(n):
        acc = None
        for j in range(n):
            term = dg_anti[j][i, j] + df[n + j] * g1[i, j]
            acc = term if acc is None else acc + term
        u_hol[i] = acc
    for j in range(n):
        acc = None
        for i in range(n):
            term = dg_hol[i][i, j] + df[i] * g1[i, j]
            acc = term if acc is None else acc + term
        u_anti[j] = acc
    return u_hol, u_anti


def vector_divergence(u_hol: np.ndarray, u_anti: np.ndarray, f_jet: Jet) -> Jet:
    """Weighted divergence of a split vector field.

    d_i u^i + u^i d_i f on the holomorphic family plus the mirrored
    antiholomorphic one; drops one order below the vector jets.
    """
    n = u_hol.shape[0]
    p = min(u_hol[0].order, u_anti[0].order)
    f1 = f_jet.truncate(p)
    acc = None
    for i in range(n):
        term = u_hol[i].truncate(p).derivative(i)
        term = term + u_hol[i].truncate(p - 1) * f1.derivative(i)
        acc = term if acc is None else acc + term
    for j in range(n):
        term = u_anti[j].truncate(p).derivative(n + j)
        term = term + u_anti[j].truncate(p - 1) * f1.derivative(n + j)
        acc = acc + term
    return acc


# --- flow constraints --------------------------------------------------------

def mc_residuals(data: HermitianData, point, order: int = 3, tol: float = 1e-9) -> dict:
    """Residuals of the three flow constraints on the bivector.

    holomorphy:        the divergence components must be holomorphic and
                       antiholomorphic respectively,
    bracket_flow:      [[g,g]] + L_{div g} g = 0 componentwise,
    double_divergence: div(div g) = 0 with the weighted vector divergence.

    All residuals are absolute values at the point.
    """
    if order < 3:
        raise DataError("constraint residuals need jet order >= 3")
    n = data.n
    u_hol, u_anti = divergence_g(data, point, order)

    res1 = 0.0
    for i in range(n):
        for k in range(n):
            res1 = max(res1, abs(u_hol[i].derivative(n + k).value))
            res1 = max(res1, abs(u_anti[i].derivative(k).value))

    gj = data.g_jets(point, order)
    bracket = double_bracket_jets(gj, gj)
    w = np.empty(2 * n, dtype=object)
    for k in range(n):
        w[k] = u_hol[k]
        w[n + k] = u_anti[k]
    g_real = realify(BIVECTOR_SIGNATURE, array_truncate(gj, order - 1), n)
    flow = lie_derivative_jets(w, g_real, ("up", "up"))
    total = realify(BIVECTOR_SIGNATURE, bracket, n) + flow
    res2 = float(np.max(np.abs(array_values(total))))

    fj = data.f_jet(point, order)
    res3 = abs(vector_divergence(u_hol, u_anti, fj).value)

    worst = max(res1, res2, res3)
    return {
        "holomorphy": res1,
        "bracket_flow": res2,
        "double_divergence": res3,
        "max_residual": worst,
        "tol": tol,
        "passed": worst <= tol,
    }


# --- induced background ------------------------------------------------------

def _det(mat: np.ndarray) -> Jet:
    m = mat.shape[0]
    if m == 1:
        return mat[0, 0]
    acc = None
    for k in range(m):
        minor = np.delete(np.delete(mat, 0, axis=0), k, axis=1)
        term = mat[0, k] * _det(minor)
        if k % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def lower_metric_jets(gj: np.ndarray) -> np.ndarray:
    """Lower Hermitian block g_{i kbar}, the inverse transpose of the input."""
    return invert_jet_matrix(gj).T


def background_from_g(data: HermitianData, point, order: int = 3):
    """Metric, two-form, and dilaton jets induced by the bivector.

    G_{i kbar} = g_{i kbar} with symmetric completion, B_{i kbar} =
    -g_{i kbar} with antisymmetric completion, pure-index blocks zero, and
    phi = (1/2) log det{g_{i kbar}} + phi0.  Raises a domain error when the
    block is singular or the determinant is not positive at the point.
    """
    n = data.n
    gj = data.g_jets(point, order)
    glow = lower_metric_jets(gj)
    num_vars = gj[0, 0].num_vars
    big_g = jet_zeros((2 * n, 2 * n), order, num_vars)
    big_b = jet_zeros((2 * n, 2 * n), order, num_vars)
    for i in range(n):
        for k in range(n):
            big_g[i, n + k] = glow[i, k]
            big_g[n + k, i] = glow[i, k]
            big_b[i, n + k] = -glow[i, k]
            big_b[n + k, i] = glow[i, k]
    det = _det(glow)
    c = det.value
    if not c.real > 0.0 or abs(c.imag) > 1e-9 * max(abs(c), 1.0):
        raise JetDomainError(
            "metric determinant must be positive for the dilaton log"
        )
    phi = jet_log(det) * 0.5 + data.phi0_jet(point, order)
    return big_g, big_b, phi


# --- curvature machinery -----------------------------------------------------

def christoffel_jets(big_g: np.ndarray) -> np.ndarray:
    """Levi-Civita symbols Gamma^l_{mu nu}; drops one order."""
    m = big_g.shape[0]
    p = big_g[0, 0].order
    if p < 1:
        raise DataError("Christoffel symbols need jet order >= 1")
    ginv = array_truncate(invert_jet_matrix(big_g), p - 1)
    dg = [array_derivative(big_g, r) for r in range(m)]
    out = np.empty((m, m, m), dtype=object)
    for lam in range(m):
        for mu in range(m):
            for nu in range(mu, m):
                acc = None
                for r in range(m):
                    term = ginv[lam, r] * (
                        dg[mu][r, nu] + dg[nu][r, mu] - dg[r][mu, nu]
                    )
                    acc = term if acc is None else acc + term
                sym = acc * 0.5
                out[lam, mu, nu] = sym
                out[lam, nu, mu] = sym
    return out


def riemann_jets(gamma: np.ndarray) -> np.ndarray:
    """Curvature R^r_{s mu nu} of the symbols; drops one order."""
    m = gamma.shape[0]
    p = gamma[0, 0, 0].order
    if p < 1:
        raise DataError("curvature needs jet order >= 1")
    dgam = [array_derivative(gamma, v) for v in range(m)]
    g1 = array_truncate(gamma, p - 1)
    out = np.empty((m, m, m, m), dtype=object)
    for r in range(m):
        for s in range(m):
            for mu in range(m):
                for nu in range(m):
                    acc = dgam[mu][r, nu, s] - dgam[nu][r, mu, s]
                    for lam in range(m):
                        acc = acc + (
                            g1[r, mu, lam] * g1[lam, nu, s]
                            - g1[r, nu, lam] * g1[lam, mu, s]
                        )
                    out[r, s, mu, nu] = acc
    return out


def ricci_tensor_jets(big_g: np.ndarray) -> np.ndarray:
    """Ricci tensor R_{s nu} = R^r_{s r nu} from the metric jets."""
    gamma = christoffel_jets(big_g)
    riem = riemann_jets(gamma)
    m = big_g.shape[0]
    out = np.empty((m, m), dtype=object)
    for s in range(m):
        for nu in range(m):
            acc = None
            for r in range(m):
                acc = riem[r, s, r, nu] if acc is None else acc + riem[r, s, r, nu]
            out[s, nu] = acc
    return out


def field_strength_jets(big_b: np.ndarray) -> np.ndarray:
    """Three-form H_{mu nu rho} = d_mu B_{nu rho} + d_nu B_{rho mu} + d_rho B_{mu nu}."""
    m = big_b.shape[0]
    db = [array_derivative(big_b, v) for v in range(m)]
    out = np.empty((m, m, m), dtype=object)
    for mu in range(m):
        for nu in range(m):
            for rho in range(m):
                out[mu, nu, rho] = (
                    db[mu][nu, rho] + db[nu][rho, mu] + db[rho][mu, nu]
                )
    return out


@dataclass
class EinsteinResiduals:
    """Pointwise residual values of the three background equations."""

    eq1: np.ndarray
    eq2: np.ndarray
    eq3: complex

    @property
    def max_residual(self) -> float:
        return max(
            float(np.max(np.abs(self.eq1))),
            float(np.max(np.abs(self.eq2))),
            abs(self.eq3),
        )

    def passed(self, tol: float) -> bool:
        return self.max_residual <= tol


def einstein_residuals(
    big_g: np.ndarray, big_b: np.ndarray, phi: Jet, tol: float = 1e-9
) -> EinsteinResiduals:
    """Residuals of the graviton, two-form, and dilaton equations.

    eq1^{mu nu} = R^{mu nu} - (1/4) H^{mu l r} H^nu_{l r} + 2 nabla^mu nabla^nu phi
    eq2^{nu r}  = nabla_mu H^{mu nu r} - 2 (nabla_l phi) H^{l nu r}
    eq3         = 4 (nabla phi)^2 - 4 nabla_mu nabla^mu phi + R
                  + (1/12) H_{mu nu r} H^{mu nu r}

    Indices are raised with the inverse metric; eq2 is stored exactly
    antisymmetric by construction.
    """
    m = big_g.shape[0]
    p = big_g[0, 0].order
    if p < 3:
        raise DataError("background residuals need jet order >= 3")
    q = p - 2
    ginv = invert_jet_matrix(big_g)
    ginv_q = array_truncate(ginv, q)
    gamma = christoffel_jets(big_g)
    gamma_q = array_truncate(gamma, q)
    ricci = ricci_tensor_jets(big_g)

    # scalar curvature
    scal = None
    for s in range(m):
        for nu in range(m):
            term = ginv_q[s, nu] * ricci[s, nu]
            scal = term if scal is None else scal + term

    # dilaton derivatives and covariant Hessian
    phi_p = phi.truncate(p)
    dphi = [phi_p.derivative(a) for a in range(m)]
    dphi_q = [d.truncate(q) for d in dphi]
    hess = np.empty((m, m), dtype=object)
    for a in range(m):
        for b in range(m):
            acc = dphi[a].derivative(b)
            for lam in range(m):
                acc = acc - gamma_q[lam, a, b] * dphi_q[lam]
            hess[a, b] = acc

    # field strength, raised versions
    h_low = field_strength_jets(big_b)
    h_q = array_truncate(h_low, q)
    h1 = np.empty((m, m, m), dtype=object)
    ginv1 = array_truncate(ginv, p - 1)
    for mu in range(m):
        for nu in range(m):
            for rho in range(m):
                acc = None
                for s in range(m):
                    term = ginv1[mu, s] * h_low[s, nu, rho]
                    acc = term if acc is None else acc + term
                h1[mu, nu, rho] = acc
    h_up = np.empty((m, m, m), dtype=object)
    for mu in range(m):
        for nu in range(m):
            for rho in range(m):
                acc = None
                for a in range(m):
                    for b in range(m):
                        term = ginv1[nu, a] * ginv1[rho, b] * h1[mu, a, b]
                        acc = term if acc is None else acc + term
                h_up[mu, nu, rho] = acc
    h1_q = array_truncate(h1, q)
    h_up_q = array_truncate(h_up, q)
    dh_up = [array_derivative(h_up, v) for v in range(m)]

    # graviton equation
    ric_up = np.empty((m, m), dtype=object)
    hess_up = np.empty((m, m), dtype=object)
    for mu in range(m):
        for nu in range(m):
            acc_r = None
            acc_h = None
            for s in range(m):
                for lam in range(m):
                    weight = ginv_q[mu, s] * ginv_q[nu, lam]
                    term_r = weight * ricci[s, lam]
                    term_h = weight * hess[s, lam]
                    acc_r = term_r if acc_r is None else acc_r + term_r
                    acc_h = term_h if acc_h is None else acc_h + term_h
            ric_up[mu, nu] = acc_r
            hess_up[mu, nu] = acc_h
    eq1 = np.empty((m, m), dtype=complex)
    for mu in range(m):
        for nu in range(m):
            acc = None
            for lam in range(m):
                for rho in range(m):
                    term = h_up_q[mu, lam, rho] * h1_q[nu, lam, rho]
                    acc = term if acc is None else acc + term
            total = ric_up[mu, nu] - acc * 0.25 + hess_up[mu, nu] * 2.0
            eq1[mu, nu] = total.value

    # two-form equation, filled antisymmetrically
    eq2 = np.zeros((m, m), dtype=complex)
    for nu in range(m):
        for rho in range(nu + 1, m):
            acc = None
            for mu in range(m):
                term = dh_up[mu][mu, nu, rho]
                for lam in range(m):
                    term = term + (
                        gamma_q[mu, mu, lam] * h_up_q[lam, nu, rho]
                        + gamma_q[nu, mu, lam] * h_up_q[mu, lam, rho]
                        + gamma_q[rho, mu, lam] * h_up_q[mu, nu, lam]
                    )
                acc = term if acc is None else acc + term
            for lam in range(m):
                acc = acc - 2.0 * dphi_q[lam] * h_up_q[lam, nu, rho]
            eq2[nu, rho] = acc.value
            eq2[rho, nu] = -acc.value

    # dilaton equation
    grad_sq = None
    box_phi = None
    for a in range(m):
        for b in range(m):
            term_g = ginv_q[a, b] * dphi_q[a] * dphi_q[b]
            term_b = ginv_q[a, b] * hess[a, b]
            grad_sq = term_g if grad_sq is None else grad_sq + term_g
            box_phi = term_b if box_phi is None else box_phi + term_b
    h_sq = None
    for mu in range(m):
        for nu in range(m):
            for rho in range(m):
                term = h_q[mu, nu, rho] * h_up_q[mu, nu, rho]
                h_sq = term if h_sq is None else h_sq + term
    eq3 = (
        grad_sq * 4.0 - box_phi * 4.0 + scal + h_sq * (1.0 / 12.0)
    ).value

    return EinsteinResiduals(eq1=eq1, eq2=eq2, eq3=eq3)


# --- curvature identity -----------------------------------------------------

def ricci_kahler_identity(
    data: HermitianData,
    point,
    order: int = 3,
    tol: float = 1e-7,
    kahler_tol: float = 1e-9,
) -> dict:
    """Check the curvature identity R^{i jbar} = (1/2) [[g,g]]^{i jbar}.

    The mixed Ricci block is computed two ways: directly as
    -d_i d_jbar log det of the lower block with both indices raised, and
    through the Christoffel path on the realified metric.  Non-Kahler
    input is reported through is_kahler rather than raised.
    """
    if order < 3:
        raise DataError("curvature identity needs jet order >= 3")
    n = data.n
    gj = data.g_jets(point, order)
    ginv = invert_jet_matrix(gj)
    glow = ginv.T

    kdev = 0.0
    for k in range(n):
        for i in range(n):
            for j in range(n):
                diff = glow[i, j].derivative(k) - glow[k, j].derivative(i)
                kdev = max(kdev, abs(diff.value))

    det = _det(glow)
    c = det.value
    if not c.real > 0.0 or abs(c.imag) > 1e-9 * max(abs(c), 1.0):
        raise JetDomainError("metric determinant must be positive at the point")
    logdet = jet_log(det)
    ric_low = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            ric_low[i, j] = -logdet.derivative(i).derivative(n + j)
    # raise both slots with the upper block itself
    g_q = array_truncate(gj, order - 2)
    ric_up = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            acc = None
            for k in range(n):
                for l in range(n):
                    term = g_q[i, l] * g_q[k, j] * ric_low[k, l]
                    acc = term if acc is None else acc + term
            ric_up[i, j] = acc.value

    bracket = array_values(double_bracket_jets(gj, gj))
    scale = max(1.0, float(np.max(np.abs(ric_up))))
    identity_res = float(np.max(np.abs(ric_up - 0.5 * bracket))) / scale

    big_g, _, _ = background_from_g(data, point, order)
    ricci_real = ricci_tensor_jets(big_g)
    cross = 0.0
    for i in range(n):
        for j in range(n):
            diff = ricci_real[i, n + j].value - ric_low[i, j].value
            cross = max(cross, abs(diff))
    cross_res = cross / scale

    is_kahler = kdev <= kahler_tol
    return {
        "kahler_deviation": kdev,
        "is_kahler": is_kahler,
        "identity_residual": identity_res,
        "christoffel_agreement": cross_res,
        "tol": tol,
        "passed": bool(is_kahler and identity_res <= tol),
    }


# --- equivalence harness ----------------------------------------------------

def equivalence_report(
    data: HermitianData, points, order: int = 3, tol: float = 1e-6
) -> dict:
    """Classify each point by simultaneous vanishing of both systems.

    Runs the flow-constraint residuals and the background-equation
    residuals per point; classifications are both-vanish, both-violated,
    or discrepancy.  Any discrepancy fails the report.
    """
    entries = []
    counts = {"both-vanish": 0, "both-violated": 0, "discrepancy": 0}
    for idx, pt in enumerate(points):
        mc = mc_residuals(data, pt, order, tol)
        big_g, big_b, phi = background_from_g(data, pt, order)
        ein = einstein_residuals(big_g, big_b, phi, tol)
        mc_violated = mc["max_residual"] > tol
        ein_violated = ein.max_residual > tol
        if mc_violated == ein_violated:
            label = "both-violated" if mc_violated else "both-vanish"
        else:
            label = "discrepancy"
        counts[label] += 1
        entries.append(
            {
                "index": idx,
                "point": [complex(c) for c in pt],
                "constraint_residual": mc["max_residual"],
                "einstein_residual": ein.max_residual,
                "classification": label,
            }
        )
    return {
        "points": entries,
        "counts": counts,
        "tol": tol,
        "passed": counts["discrepancy"] == 0,
    }
