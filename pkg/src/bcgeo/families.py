"""Built-in geometry families and random structure generators.

Random expressions are assembled directly from syntax nodes with numeric
coefficients; nothing goes through string formatting.  Sample points put
the antiholomorphic coordinates at the literal conjugates of the
holomorphic ones.
"""

from __future__ import annotations

import numpy as np

from .beltrami import BeltramiField
from .cgeom import Chart, SectionE
from .fieldlang import (
    ONE,
    ZERO,
    Add,
    Coord,
    Div,
    Expr,
    Mul,
    Neg,
    Num,
    Pow,
    Sub,
    conjugate_expr,
)
from .gravity import HermitianData
from .homotopy import GradedElement
from .jets import array_values


def _identity_block(n: int):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def flat(n: int) -> HermitianData:
    """Identity bivector with a constant volume weight."""
    return HermitianData(Chart(n, ZERO), _identity_block(n))


def linear_dilaton(n: int, lam: float) -> HermitianData:
    """Flat bivector with volume exponent -2 lam (z1 + zb1)."""
    f = Mul(Num(-2.0 * lam), Add(Coord("z", 1), Coord("zb", 1)))
    return HermitianData(Chart(n, f), _identity_block(n))


def fubini_study() -> HermitianData:
    """One-dimensional round metric: g^{1 1bar} = (1 + z1 zb1)^2."""
    g = Pow(Add(ONE, Mul(Coord("z", 1), Coord("zb", 1))), 2)
    return HermitianData(Chart(1, ZERO), [[g]])


# --- random generators -------------------------------------------------------

def sample_points(rng: np.random.Generator, n: int, count: int, box: float = 0.4):
    """Points with zb = conj(z), coordinates drawn from a centered box."""
    pts = []
    for _ in range(count):
        zs = [complex(rng.uniform(-box, box), rng.uniform(-box, box))
              for _ in range(n)]
        pts.append(tuple(zs + [z.conjugate() for z in zs]))
    return pts


def _rand_num(rng: np.random.Generator, scale: float, real: bool = False) -> Num:
    if real:
        return Num(complex(scale * rng.normal()))
    return Num(complex(scale * rng.normal(), scale * rng.normal()))


def random_polynomial(
    rng: np.random.Generator,
    n: int,
    scale: float = 1.0,
    quadratics: int = 3,
    real: bool = False,
) -> Expr:
    """Constant plus full linear part plus a few random quadratic terms."""
    coords = [Coord("z", k + 1) for k in range(n)]
    coords += [Coord("zb", k + 1) for k in range(n)]
    expr: Expr = _rand_num(rng, scale, real)
    for c in coords:
        expr = Add(expr, Mul(_rand_num(rng, scale, real), c))
    for _ in range(quadratics):
        a, b = rng.integers(0, len(coords), size=2)
        term = Mul(_rand_num(rng, scale, real), Mul(coords[a], coords[b]))
        expr = Add(expr, term)
    return expr


def random_section(rng: np.random.Generator, chart: Chart, scale: float = 1.0) -> SectionE:
    n = chart.dim

    def block():
        return [random_polynomial(rng, n, scale) for _ in range(n)]

    return SectionE(block(), block(), block(), block())


def random_beltrami(
    rng: np.random.Generator, chart: Chart, scale: float = 0.2
) -> BeltramiField:
    """Invertible structure: identity g block plus small polynomial blocks."""
    n = chart.dim

    def small_block(diag: Expr | None = None):
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                entry = random_polynomial(rng, n, scale, quadratics=2)
                if diag is not None and i == j:
                    entry = Add(diag, entry)
                row.append(entry)
            out.append(row)
        return out

    return BeltramiField(
        g=small_block(diag=ONE),
        mu=small_block(),
        mubar=small_block(),
        b=small_block(),
        dim=n,
    )


def random_graded_element(
    rng: np.random.Generator, chart: Chart, degree: int, scale: float = 1.0
) -> GradedElement:
    n = chart.dim
    scalar = random_polynomial(rng, n, scale)
    if degree in (0, 3):
        return GradedElement(degree, scalar, dim=n)
    vec = tuple(random_polynomial(rng, n, scale) for _ in range(n))
    form = tuple(random_polynomial(rng, n, scale) for _ in range(n))
    return GradedElement(degree, scalar, (vec, form))


# --- random Hermitian and Kahler bivectors ------------------------------------

def _random_monomial(rng: np.random.Generator, n: int, scale: float) -> Expr:
    # one or two coordinate factors, real coefficient
    coords = [Coord("z", k + 1) for k in range(n)]
    coords += [Coord("zb", k + 1) for k in range(n)]
    expr: Expr = _rand_num(rng, scale, real=True)
    for _ in range(int(rng.integers(1, 3))):
        expr = Mul(expr, coords[int(rng.integers(0, len(coords)))])
    return expr


def random_hermitian(
    rng: np.random.Generator, n: int = 2, scale: float = 0.05, terms: int = 2
) -> HermitianData:
    """Near-identity Hermitian bivector, generically not Kahler.

    Entries above the diagonal are small random polynomials; the mirrored
    entries are their formal conjugates, and diagonal perturbations come
    symmetrized, so the value matrix is Hermitian wherever zb = conj(z).
    """
    block = [[None] * n for _ in range(n)]
    for i in range(n):
        pert: Expr = _random_monomial(rng, n, scale)
        for _ in range(terms - 1):
            pert = Add(pert, _random_monomial(rng, n, scale))
        block[i][i] = Add(ONE, Add(pert, conjugate_expr(pert)))
        for j in range(i + 1, n):
            entry: Expr = _random_monomial(rng, n, scale)
            for _ in range(terms - 1):
                entry = Add(entry, _random_monomial(rng, n, scale))
            block[i][j] = entry
            block[j][i] = conjugate_expr(entry)
    return HermitianData(Chart(n, ZERO), block)


def _poly_diff(poly: dict, hol: bool, idx: int) -> dict:
    out: dict = {}
    for (he, ae), c in poly.items():
        exps = he if hol else ae
        e = exps[idx]
        if e == 0:
            continue
        new = list(exps)
        new[idx] -= 1
        key = (tuple(new), ae) if hol else (he, tuple(new))
        out[key] = out.get(key, 0.0) + c * e
    return out


def _poly_to_expr(poly: dict) -> Expr:
    terms = []
    for (he, ae), c in sorted(poly.items()):
        if c == 0.0:
            continue
        node: Expr = Num(complex(c))
        for k, e in enumerate(he):
            for _ in range(e):
                node = Mul(node, Coord("z", k + 1))
        for k, e in enumerate(ae):
            for _ in range(e):
                node = Mul(node, Coord("zb", k + 1))
        terms.append(node)
    if not terms:
        return ZERO
    expr = terms[0]
    for t in terms[1:]:
        expr = Add(expr, t)
    return expr


def random_kahler(
    rng: np.random.Generator, n: int = 2, scale: float = 0.05
) -> HermitianData:
    """Bivector inverse to ddbar of a random real potential.

    The potential is sum_i z_i zb_i plus quartic corrections whose real
    coefficient tensor satisfies eps[a,b,c,d] = eps[c,d,a,b], which keeps
    it real-valued on the conjugate locus.  The lower block is
    differentiated at the monomial level and inverted symbolically.
    """
    if n not in (1, 2):
        raise ValueError("symbolic inversion is implemented for n in {1, 2}")
    eps = rng.uniform(-scale, scale, size=(n,) * 4)
    eps = 0.5 * (eps + eps.transpose(2, 3, 0, 1))
    poly: dict = {}
    for i in range(n):
        he = [0] * n
        ae = [0] * n
        he[i] = 1
        ae[i] = 1
        poly[(tuple(he), tuple(ae))] = 1.0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    he = [0] * n
                    ae = [0] * n
                    he[a] += 1
                    he[b] += 1
                    ae[c] += 1
                    ae[d] += 1
                    key = (tuple(he), tuple(ae))
                    poly[key] = poly.get(key, 0.0) + eps[a, b, c, d]

    low = [[_poly_to_expr(_poly_diff(_poly_diff(poly, True, i), False, j))
            for j in range(n)] for i in range(n)]
    if n == 1:
        upper = [[Div(ONE, low[0][0])]]
    else:
        det = Sub(
            Mul(low[0][0], low[1][1]), Mul(low[0][1], low[1][0])
        )
        # upper block is the inverse transpose of the lower one
        upper = [
            [Div(low[1][1], det), Div(Neg(low[1][0]), det)],
            [Div(Neg(low[0][1]), det), Div(low[0][0], det)],
        ]
    return HermitianData(Chart(n, ZERO), upper)


def well_conditioned_points(
    data: HermitianData,
    rng: np.random.Generator,
    count: int,
    box: float = 0.4,
    cond_max: float = 10.0,
    max_tries: int = 2000,
):
    """Sample conjugate-locus points where the bivector is well conditioned."""
    pts = []
    tries = 0
    while len(pts) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("could not find enough well-conditioned points")
        pt = sample_points(rng, data.n, 1, box)[0]
        values = array_values(data.g_jets(pt, 0))
        if np.linalg.cond(values) <= cond_max:
            pts.append(pt)
    return pts
