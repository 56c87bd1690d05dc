"""Tensor calculus on a local complex chart.

A chart carries n holomorphic coordinates z1..zn together with their
formal conjugates zb1..zbn, treated as independent variables.  Tensor
components are expressions; evaluation produces jets in the 2n real
slots ordered (z1..zn, zb1..zbn).  Index slots are typed by chirality
(holomorphic or antiholomorphic) and variance (up or down).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .fieldlang import (
    Expr,
    ZERO,
    conjugate_expr,
    eval_jet,
    eval_value,
    parse,
    validate_param_name,
)
from .jets import (
    MAX_VARS,
    Jet,
    array_derivative,
    jet_const,
    jet_zeros,
)

MAX_DIM = MAX_VARS // 2


class DataError(ValueError):
    """Input data violates a structural requirement (shape, symmetry)."""


class IndexType(Enum):
    HOL_UP = "hol_up"
    HOL_DOWN = "hol_down"
    ANTI_UP = "anti_up"
    ANTI_DOWN = "anti_down"

    @property
    def is_up(self) -> bool:
        return self in (IndexType.HOL_UP, IndexType.ANTI_UP)

    @property
    def is_hol(self) -> bool:
        return self in (IndexType.HOL_UP, IndexType.HOL_DOWN)

    @property
    def conjugated(self) -> "IndexType":
        return _CONJ_TYPE[self]


_CONJ_TYPE = {
    IndexType.HOL_UP: IndexType.ANTI_UP,
    IndexType.ANTI_UP: IndexType.HOL_UP,
    IndexType.HOL_DOWN: IndexType.ANTI_DOWN,
    IndexType.ANTI_DOWN: IndexType.HOL_DOWN,
}


class Chart:
    """Local complex chart with an optional weighted volume form.

    `volume_exponent` is the scalar f in the volume weight e^f; the
    divergence operators below differentiate against it.
    """

    def __init__(
        self,
        dim: int,
        volume_exponent: "Expr | str" = "0",
        params: dict[str, complex] | None = None,
    ):
        if not 1 <= dim <= MAX_DIM:
            raise DataError(f"chart dimension must be in 1..{MAX_DIM}")
        self.dim = dim
        self.params = {k: complex(v) for k, v in (params or {}).items()}
        for name in self.params:
            validate_param_name(name)
        if isinstance(volume_exponent, str):
            volume_exponent = self.parse(volume_exponent)
        self.volume_exponent = volume_exponent

    @property
    def num_vars(self) -> int:
        return 2 * self.dim

    def parse(self, text: str) -> Expr:
        return parse(text, self.dim, tuple(self.params))

    def check_point(self, point: Sequence[complex]) -> tuple[complex, ...]:
        pt = tuple(complex(c) for c in point)
        if len(pt) != self.num_vars:
            raise DataError(
                f"point must have {self.num_vars} entries (z1..z{self.dim}, "
                f"zb1..zb{self.dim}), got {len(pt)}"
            )
        return pt

    def eval_jet(self, expr: Expr, point: Sequence[complex], order: int) -> Jet:
        return eval_jet(expr, self.check_point(point), order, self.params)

    def eval_value(self, expr: Expr, point: Sequence[complex]) -> complex:
        return eval_value(expr, self.check_point(point), self.params)

    def eval_array(
        self, exprs: np.ndarray, point: Sequence[complex], order: int
    ) -> np.ndarray:
        pt = self.check_point(point)
        out = np.empty(exprs.shape, dtype=object)
        for idx in np.ndindex(*exprs.shape):
            out[idx] = eval_jet(exprs[idx], pt, order, self.params)
        return out


def _as_expr_array(components, rank: int, dim: int, chart: Chart | None) -> np.ndarray:
    arr = np.empty((dim,) * rank, dtype=object) if rank else np.empty((), dtype=object)
    src = np.asarray(components, dtype=object) if rank else None
    if rank and src.shape != arr.shape:
        raise DataError(
            f"component array has shape {src.shape}, expected {(dim,) * rank}"
        )
    for idx in np.ndindex(*arr.shape):
        item = src[idx] if rank else components
        if isinstance(item, str):
            if chart is None:
                raise DataError("string components require a chart to parse")
            item = chart.parse(item)
        arr[idx] = item
    return arr


class TensorField:
    """Typed tensor with expression components indexed 0..n-1 per slot."""

    def __init__(
        self,
        signature: Sequence[IndexType],
        components,
        dim: int,
        chart: Chart | None = None,
    ):
        self.signature = tuple(signature)
        self.dim = dim
        self.components = _as_expr_array(components, len(self.signature), dim, chart)

    @property
    def rank(self) -> int:
        return len(self.signature)

    def eval_jets(self, chart: Chart, point, order: int) -> np.ndarray:
        return chart.eval_array(self.components, point, order)

    def conjugate(self) -> "TensorField":
        sig = tuple(t.conjugated for t in self.signature)
        comps = np.empty(self.components.shape, dtype=object)
        for idx in np.ndindex(*self.components.shape):
            comps[idx] = conjugate_expr(self.components[idx])
        return TensorField(sig, comps, self.dim)


@dataclass(frozen=True)
class ChiralSection:
    """One chirality half of a generalized vector: vector plus one-form."""

    vec: tuple[Expr, ...]
    form: tuple[Expr, ...]

    @property
    def dim(self) -> int:
        return len(self.vec)


class SectionE:
    """Section of the realified generalized tangent bundle.

    Holds holomorphic components (v, omega) and antiholomorphic ones
    (vbar, omegabar), each a tuple of n expressions.
    """

    def __init__(self, v, omega, vbar, omegabar, chart: Chart | None = None):
        def conv(items):
            out = []
            for item in items:
                if isinstance(item, str):
                    if chart is None:
                        raise DataError("string components require a chart")
                    item = chart.parse(item)
                out.append(item)
            return tuple(out)

        self.v = conv(v)
        self.omega = conv(omega)
        self.vbar = conv(vbar)
        self.omegabar = conv(omegabar)
        lens = {len(self.v), len(self.omega), len(self.vbar), len(self.omegabar)}
        if len(lens) != 1:
            raise DataError("section component tuples must share one length")
        self.dim = len(self.v)

    @property
    def hol(self) -> ChiralSection:
        return ChiralSection(self.v, self.omega)

    @property
    def anti(self) -> ChiralSection:
        return ChiralSection(self.vbar, self.omegabar)

    def conjugate(self) -> "SectionE":
        return SectionE(
            tuple(conjugate_expr(e) for e in self.vbar),
            tuple(conjugate_expr(e) for e in self.omegabar),
            tuple(conjugate_expr(e) for e in self.v),
            tuple(conjugate_expr(e) for e in self.omega),
        )

    @staticmethod
    def zero(dim: int) -> "SectionE":
        z = (ZERO,) * dim
        return SectionE(z, z, z, z)


# --- evaluated (jet-level) containers --------------------------------------

@dataclass
class ChiralJets:
    """Evaluated chirality half: object arrays of jets, shape (n,)."""

    vec: np.ndarray
    form: np.ndarray

    @property
    def n(self) -> int:
        return self.vec.shape[0]

    @property
    def order(self) -> int:
        return self.vec[0].order

    def truncate(self, order: int) -> "ChiralJets":
        from .jets import array_truncate

        return ChiralJets(
            array_truncate(self.vec, order), array_truncate(self.form, order)
        )

    def __add__(self, other: "ChiralJets") -> "ChiralJets":
        return ChiralJets(self.vec + other.vec, self.form + other.form)

    def __sub__(self, other: "ChiralJets") -> "ChiralJets":
        return ChiralJets(self.vec - other.vec, self.form - other.form)

    def __neg__(self) -> "ChiralJets":
        return ChiralJets(-self.vec, -self.form)

    def scale(self, c) -> "ChiralJets":
        return ChiralJets(self.vec * c, self.form * c)

    def max_abs_value(self) -> float:
        from .jets import array_max_abs_value

        return max(array_max_abs_value(self.vec), array_max_abs_value(self.form))

    @staticmethod
    def zero(n: int, order: int, num_vars: int) -> "ChiralJets":
        return ChiralJets(
            jet_zeros((n,), order, num_vars), jet_zeros((n,), order, num_vars)
        )


def eval_chiral(chart: Chart, half: ChiralSection, point, order: int) -> ChiralJets:
    vec = chart.eval_array(np.array(half.vec, dtype=object), point, order)
    form = chart.eval_array(np.array(half.form, dtype=object), point, order)
    return ChiralJets(vec, form)


@dataclass
class SectionJets:
    hol: ChiralJets
    anti: ChiralJets

    @property
    def n(self) -> int:
        return self.hol.n

    def __add__(self, other):
        return SectionJets(self.hol + other.hol, self.anti + other.anti)

    def __sub__(self, other):
        return SectionJets(self.hol - other.hol, self.anti - other.anti)

    def max_abs_value(self) -> float:
        return max(self.hol.max_abs_value(), self.anti.max_abs_value())


def eval_section(chart: Chart, sec: SectionE, point, order: int) -> SectionJets:
    return SectionJets(
        eval_chiral(chart, sec.hol, point, order),
        eval_chiral(chart, sec.anti, point, order),
    )


# --- realified operations ---------------------------------------------------

def realify(signature: Sequence[IndexType], jets: np.ndarray, n: int) -> np.ndarray:
    """Embed typed components into the full 2n-slot array.

    Holomorphic slots occupy positions 0..n-1, antiholomorphic slots
    n..2n-1; all other entries are zero jets.
    """
    rank = len(signature)
    sample = jets.flat[0] if rank else jets[()]
    out = jet_zeros((2 * n,) * rank, sample.order, sample.num_vars)
    offsets = [0 if t.is_hol else n for t in signature]
    for idx in np.ndindex(*jets.shape):
        full = tuple(i + off for i, off in zip(idx, offsets))
        out[full] = jets[idx]
    return out


def extract_block(arr: np.ndarray, signature: Sequence[IndexType], n: int) -> np.ndarray:
    """Slice the block of a realified array matching a typed signature."""
    slices = tuple(
        slice(0, n) if t.is_hol else slice(n, 2 * n) for t in signature
    )
    return arr[slices]


def lie_derivative_jets(
    vec: np.ndarray, tensor: np.ndarray, variance: Sequence[str]
) -> np.ndarray:
    """Lie derivative on realified jet arrays; result drops one order.

    `vec` has shape (m,), `tensor` shape (m,)*rank, and `variance` lists
    "up" or "down" per tensor slot.
    """
    m = vec.shape[0]
    rank = len(variance)
    p = (tensor.flat[0] if rank else tensor[()]).order
    d_tensor = [array_derivative(tensor, rho) for rho in range(m)]
    d_vec = [[vec[a].derivative(b) for b in range(m)] for a in range(m)]
    vec_t = [vec[a].truncate(p - 1) for a in range(m)]
    tensor_t = np.empty(tensor.shape, dtype=object)
    for idx in np.ndindex(*tensor.shape):
        tensor_t[idx] = tensor[idx].truncate(p - 1)

    out = np.empty(tensor.shape, dtype=object)
    for idx in np.ndindex(*tensor.shape):
        acc = vec_t[0] * d_tensor[0][idx]
        for rho in range(1, m):
            acc = acc + vec_t[rho] * d_tensor[rho][idx]
        for slot in range(rank):
            a = idx[slot]
            for rho in range(m):
                swapped = idx[:slot] + (rho,) + idx[slot + 1:]
                if variance[slot] == "down":
                    acc = acc + d_vec[rho][a] * tensor_t[swapped]
                else:
                    acc = acc - d_vec[a][rho] * tensor_t[swapped]
        out[idx] = acc
    return out


def exterior_derivative_jets(form: np.ndarray) -> np.ndarray:
    """Alternating-sum exterior derivative on a realified jet array.

    (d w)_{i0..ik} = sum_j (-1)^j d_{i_j} w_{i0.. omit j ..ik}; no
    normalizing factorial is applied.
    """
    m = form.shape[0] if form.ndim else 0
    if form.ndim == 0:
        raise DataError("exterior derivative of a scalar needs a 1-form slot")
    rank = form.ndim
    d_form = [array_derivative(form, rho) for rho in range(m)]
    out = np.empty((m,) * (rank + 1), dtype=object)
    for idx in np.ndindex(*out.shape):
        acc = None
        for j in range(rank + 1):
            rest = idx[:j] + idx[j + 1:]
            term = d_form[idx[j]][rest]
            if j % 2 == 1:
                term = -term
            acc = term if acc is None else acc + term
        out[idx] = acc
    return out


def check_antisymmetry(values: np.ndarray, tol: float = 1e-9) -> None:
    """Raise DataError unless the value array is totally antisymmetric."""
    rank = values.ndim
    if rank < 2:
        return
    scale = max(float(np.max(np.abs(values))), 1.0)
    for perm in itertools.permutations(range(rank)):
        sign = _perm_sign(perm)
        permuted = np.transpose(values, perm)
        if np.max(np.abs(permuted - sign * values)) > tol * scale:
            raise DataError("form components are not antisymmetric")


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def lie_derivative(
    chart: Chart,
    vector,
    tensor: TensorField,
    point,
    order: int,
) -> np.ndarray:
    """Lie derivative of a typed tensor along a vector field.

    `vector` is a SectionE (its one-form parts are ignored) or a pair
    (v_exprs, vbar_exprs).  Returns the realified jet array at order-1.
    """
    n = chart.dim
    if isinstance(vector, SectionE):
        v_exprs, vb_exprs = vector.v, vector.vbar
    else:
        v_exprs, vb_exprs = (
            tuple(chart.parse(c) if isinstance(c, str) else c for c in comps)
            for comps in vector
        )
    vec = np.empty(2 * n, dtype=object)
    for k in range(n):
        vec[k] = chart.eval_jet(v_exprs[k], point, order)
        vec[n + k] = chart.eval_jet(vb_exprs[k], point, order)
    jets = realify(tensor.signature, tensor.eval_jets(chart, point, order), n)
    variance = ["up" if t.is_up else "down" for t in tensor.signature]
    return lie_derivative_jets(vec, jets, variance)


def exterior_derivative(
    chart: Chart,
    form: TensorField,
    point,
    order: int,
    antisymmetry_tol: float = 1e-9,
) -> np.ndarray:
    """Exterior derivative of an all-lower-index tensor field.

    The realified components are validated to be antisymmetric before
    differentiating.  Returns the realified (rank+1)-form jets.
    """
    if any(t.is_up for t in form.signature):
        raise DataError("exterior derivative needs all-lower index slots")
    n = chart.dim
    jets = realify(form.signature, form.eval_jets(chart, point, order), n)
    from .jets import array_values

    check_antisymmetry(array_values(jets), antisymmetry_tol)
    return exterior_derivative_jets(jets)
