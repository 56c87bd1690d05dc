"""Dense truncated multivariate Taylor arithmetic over complex scalars.

A jet of order p in m variables stores the Taylor coefficients of a
function at a point: coefficient c_alpha multiplies h^alpha in the
expansion f(x0 + h) = sum_alpha c_alpha h^alpha with |alpha| <= p, so
c_alpha = (d^alpha f)(x0) / alpha!.  Monomials are ordered by total
degree, then lexicographically, which makes every lower-order
coefficient space a prefix of the higher-order one.
"""

from __future__ import annotations

import cmath
import math
import numbers
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_ORDER = 6
MAX_VARS = 8


class JetError(ValueError):
    """Base class for jet arithmetic failures."""


class JetMismatchError(JetError):
    """Operands live in different jet spaces (order or variable count)."""


class JetDomainError(JetError):
    """Operation undefined at the jet's constant term (e.g. 1/0, log 0)."""


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    # all exponent tuples of length `parts` summing to `total`, lex order
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


class JetSpace:
    """Shared immutable data for all jets of a given (num_vars, order)."""

    def __init__(self, num_vars: int, order: int):
        self.num_vars = num_vars
        self.order = order
        monos: list[tuple[int, ...]] = []
        for deg in range(order + 1):
            monos.extend(sorted(_compositions(deg, num_vars)))
        self.monomials: tuple[tuple[int, ...], ...] = tuple(monos)
        self.index: dict[tuple[int, ...], int] = {
            m: i for i, m in enumerate(monos)
        }
        self.size = len(monos)
        self.degrees = np.array([sum(m) for m in monos], dtype=np.int64)
        # number of coefficients of each truncation order (prefix lengths)
        self._prefix = [
            int(np.searchsorted(self.degrees, d, side="right"))
            for d in range(order + 1)
        ]
        self._mul_table: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
        self._diff_tables: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._embed_tables: dict[int, np.ndarray] = {}
        facts = [
            math.prod(math.factorial(e) for e in m) for m in monos
        ]
        self.factorials = np.array(facts, dtype=np.float64)

    def prefix_size(self, order: int) -> int:
        return self._prefix[order]

    @property
    def mul_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._mul_table is None:
            li, lj, lk = [], [], []
            for i, mi in enumerate(self.monomials):
                di = self.degrees[i]
                for j, mj in enumerate(self.monomials):
                    if di + self.degrees[j] > self.order:
                        continue
                    li.append(i)
                    lj.append(j)
                    lk.append(self.index[tuple(a + b for a, b in zip(mi, mj))])
            self._mul_table = (
                np.array(li, dtype=np.int64),
                np.array(lj, dtype=np.int64),
                np.array(lk, dtype=np.int64),
            )
        return self._mul_table

    def diff_table(self, var: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        # maps coefficients into the (order - 1) space: for destination
        # monomial beta, source is beta + e_var with weight beta_var + 1
        if var not in self._diff_tables:
            target = jet_space(self.num_vars, self.order - 1)
            src, dst, wgt = [], [], []
            for b_idx, beta in enumerate(target.monomials):
                alpha = list(beta)
                alpha[var] += 1
                src.append(self.index[tuple(alpha)])
                dst.append(b_idx)
                wgt.append(beta[var] + 1)
            self._diff_tables[var] = (
                np.array(src, dtype=np.int64),
                np.array(dst, dtype=np.int64),
                np.array(wgt, dtype=np.complex128),
            )
        return self._diff_tables[var]

    def embed_table(self, new_num_vars: int) -> np.ndarray:
        # position of each monomial once zero exponents are appended
        if new_num_vars not in self._embed_tables:
            target = jet_space(new_num_vars, self.order)
            pad = (0,) * (new_num_vars - self.num_vars)
            idx = [target.index[m + pad] for m in self.monomials]
            self._embed_tables[new_num_vars] = np.array(idx, dtype=np.int64)
        return self._embed_tables[new_num_vars]


@lru_cache(maxsize=None)
def jet_space(num_vars: int, order: int) -> JetSpace:
    if not 1 <= num_vars <= MAX_VARS:
        raise JetError(f"num_vars must be in 1..{MAX_VARS}, got {num_vars}")
    if not 0 <= order <= MAX_ORDER:
        raise JetError(f"order must be in 0..{MAX_ORDER}, got {order}")
    return JetSpace(num_vars, order)


class Jet:
    """Truncated Taylor expansion; immutable by convention."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.coeffs = coeffs

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def num_vars(self) -> int:
        return self.space.num_vars

    @property
    def value(self) -> complex:
        """Constant term (the function value at the expansion point)."""
        return complex(self.coeffs[0])

    def __repr__(self) -> str:
        return (
            f"Jet(order={self.order}, num_vars={self.num_vars}, "
            f"value={self.value!r})"
        )

    def _coerce(self, other) -> "Jet | None":
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise JetMismatchError(
                    "jet operands must share order and variable count: "
                    f"({self.order},{self.num_vars}) vs "
                    f"({other.order},{other.num_vars})"
                )
            return other
        if isinstance(other, numbers.Number):
            return jet_const(complex(other), self.order, self.num_vars)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, o.coeffs - self.coeffs)

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if isinstance(other, numbers.Number):
            return Jet(self.space, self.coeffs * complex(other))
        ti, tj, tk = self.space.mul_table
        res = np.zeros(self.space.size, dtype=np.complex128)
        np.add.at(res, tk, self.coeffs[ti] * o.coeffs[tj])
        return Jet(self.space, res)

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return Jet(self.space, self.coeffs * complex(other))
        return NotImplemented

    def reciprocal(self) -> "Jet":
        a0 = self.coeffs[0]
        if a0 == 0:
            raise JetDomainError("division by a jet with zero constant term")
        # 1/(a0 + N) = (1/a0) * sum_k (-N/a0)^k, N nilpotent of order p+1
        scaled = Jet(self.space, -self.coeffs / a0)
        scaled.coeffs[0] = 0.0
        acc = jet_const(1.0, self.order, self.num_vars)
        term = jet_const(1.0, self.order, self.num_vars)
        for _ in range(self.order):
            term = term * scaled
            acc = acc + term
        return Jet(self.space, acc.coeffs / a0)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if isinstance(other, numbers.Number):
            if complex(other) == 0:
                raise JetDomainError("division by zero scalar")
            return Jet(self.space, self.coeffs / complex(other))
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        if isinstance(other, numbers.Number):
            return self.reciprocal() * complex(other)
        return NotImplemented

    def __pow__(self, exponent):
        if not isinstance(exponent, numbers.Integral):
            return NotImplemented
        n = int(exponent)
        if n < 0:
            return self.reciprocal() ** (-n)
        result = jet_const(1.0, self.order, self.num_vars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def derivative(self, var: int) -> "Jet":
        """Partial derivative with respect to variable `var`; drops one order."""
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        if not 0 <= var < self.num_vars:
            raise JetError(f"variable index {var} out of range")
        src, dst, wgt = self.space.diff_table(var)
        target = jet_space(self.num_vars, self.order - 1)
        res = np.zeros(target.size, dtype=np.complex128)
        res[dst] = self.coeffs[src] * wgt
        return Jet(target, res)

    def truncate(self, order: int) -> "Jet":
        """Drop coefficients above `order` (must not exceed current order)."""
        if order > self.order or order < 0:
            raise JetError(
                f"cannot truncate order-{self.order} jet to order {order}"
            )
        if order == self.order:
            return self
        target = jet_space(self.num_vars, order)
        return Jet(target, self.coeffs[: target.size].copy())

    def extend_vars(self, new_num_vars: int) -> "Jet":
        """Embed into a space with extra trailing variables (constant in them)."""
        if new_num_vars < self.num_vars:
            raise JetError("extend_vars cannot drop variables")
        if new_num_vars == self.num_vars:
            return self
        target = jet_space(new_num_vars, self.order)
        res = np.zeros(target.size, dtype=np.complex128)
        res[self.space.embed_table(new_num_vars)] = self.coeffs
        return Jet(target, res)

    def coefficient(self, alpha: Sequence[int]) -> complex:
        key = tuple(int(a) for a in alpha)
        if len(key) != self.num_vars:
            raise JetError("multi-index length must equal num_vars")
        if key not in self.space.index:
            raise JetError(f"multi-index {key} exceeds jet order {self.order}")
        return complex(self.coeffs[self.space.index[key]])

    def partial(self, alpha: Sequence[int]) -> complex:
        """Mixed partial derivative value: alpha! times the Taylor coefficient."""
        key = tuple(int(a) for a in alpha)
        idx = self.space.index.get(key)
        if idx is None:
            raise JetError(f"multi-index {key} exceeds jet order {self.order}")
        return complex(self.coeffs[idx] * self.space.factorials[idx])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))


def jet_const(value: complex, order: int, num_vars: int) -> Jet:
    space = jet_space(num_vars, order)
    coeffs = np.zeros(space.size, dtype=np.complex128)
    coeffs[0] = complex(value)
    return Jet(space, coeffs)


def jet_var(var: int, value: complex, order: int, num_vars: int) -> Jet:
    """Seed jet for coordinate `var`: value plus the first-order monomial."""
    space = jet_space(num_vars, order)
    if not 0 <= var < num_vars:
        raise JetError(f"variable index {var} out of range")
    coeffs = np.zeros(space.size, dtype=np.complex128)
    coeffs[0] = complex(value)
    if order >= 1:
        e = tuple(1 if k == var else 0 for k in range(num_vars))
        coeffs[space.index[e]] = 1.0
    return Jet(space, coeffs)


def jet_exp(a: Jet) -> Jet:
    """exp of a jet: exp(a0) * sum_k N^k / k! with N the nilpotent part."""
    nil = Jet(a.space, a.coeffs.copy())
    nil.coeffs[0] = 0.0
    acc = jet_const(1.0, a.order, a.num_vars)
    term = jet_const(1.0, a.order, a.num_vars)
    for k in range(1, a.order + 1):
        term = term * nil
        acc = acc + term * (1.0 / math.factorial(k))
    return acc * cmath.exp(a.coeffs[0])


def jet_log(a: Jet) -> Jet:
    """Principal branch log of a jet; constant term must be nonzero."""
    a0 = a.coeffs[0]
    if a0 == 0:
        raise JetDomainError("log of a jet with zero constant term")
    scaled = Jet(a.space, a.coeffs / a0)
    scaled.coeffs[0] = 0.0
    acc = jet_const(cmath.log(a0), a.order, a.num_vars)
    term = jet_const(1.0, a.order, a.num_vars)
    for k in range(1, a.order + 1):
        term = term * scaled
        acc = acc + term * ((-1.0) ** (k + 1) / k)
    return acc


# ---------------------------------------------------------------------------
# helpers for object arrays of jets (tensor components)

def jet_zeros(shape, order: int, num_vars: int) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    for idx in np.ndindex(*arr.shape):
        arr[idx] = jet_const(0.0, order, num_vars)
    return arr


def array_derivative(arr: np.ndarray, var: int) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(*arr.shape):
        out[idx] = arr[idx].derivative(var)
    return out


def array_truncate(arr: np.ndarray, order: int) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(*arr.shape):
        out[idx] = arr[idx].truncate(order)
    return out


def array_values(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape, dtype=np.complex128)
    for idx in np.ndindex(*arr.shape):
        out[idx] = arr[idx].value
    return out


def array_max_abs_value(arr: np.ndarray) -> float:
    return float(np.max(np.abs(array_values(arr)))) if arr.size else 0.0


def invert_jet_matrix(mat: np.ndarray) -> np.ndarray:
    """Invert a square matrix of jets by Gauss-Jordan elimination.

    Pivots are chosen by the largest constant-term magnitude; a pivot
    whose constant term vanishes makes the matrix singular at the point.
    """
    m = mat.shape[0]
    if mat.shape != (m, m):
        raise JetError("matrix of jets must be square")
    work = np.empty((m, 2 * m), dtype=object)
    sample = mat[0, 0]
    for r in range(m):
        for c in range(m):
            work[r, c] = mat[r, c]
            work[r, m + c] = jet_const(
                1.0 if r == c else 0.0, sample.order, sample.num_vars
            )
    for col in range(m):
        pivot = max(range(col, m), key=lambda r: abs(work[r, col].value))
        if work[pivot, col].value == 0:
            raise JetDomainError("jet matrix is singular at the base point")
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
        inv_p = work[col, col].reciprocal()
        for c in range(2 * m):
            work[col, c] = work[col, c] * inv_p
        for r in range(m):
            if r == col:
                continue
            factor = work[r, col]
            if factor.max_abs() == 0.0:
                continue
            for c in range(2 * m):
                work[r, c] = work[r, c] - factor * work[col, c]
    return work[:, m:].copy()
