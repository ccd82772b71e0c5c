"""Truncated multivariate Taylor arithmetic.

A jet of order ``d`` in ``n`` variables stores the Taylor coefficients
``c_alpha = (d^alpha f)(p) / alpha!`` for every multi-index with
``|alpha| <= d``. Products, quotients and elementary functions are exact
truncated-series operations, so derivatives come out at machine precision.

:class:`Jet` is the scalar type used to write metric components.
:class:`JetArray` holds a whole tensor of jets (coefficients on the last
axis) and is what the curvature engine works with.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = ["JetAlgebra", "Jet", "JetArray", "algebra", "jeinsum", "InsufficientOrder"]


class InsufficientOrder(ValueError):
    """Raised when a derivative beyond the available jet order is requested."""


class JetAlgebra:
    """Index tables for jets of a fixed (nvars, order)."""

    def __init__(self, nvars: int, order: int):
        if nvars < 1 or order < 0:
            raise ValueError("need nvars >= 1 and order >= 0")
        self.nvars = nvars
        self.order = order
        monos = []
        for deg in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), deg):
                e = [0] * nvars
                for v in combo:
                    e[v] += 1
                monos.append(tuple(e))
        self.monomials = monos
        self.index = {m: i for i, m in enumerate(monos)}
        self.size = len(monos)
        self.degree = np.array([sum(m) for m in monos])

        ia, ib, ic = [], [], []
        for i, a in enumerate(monos):
            for j, b in enumerate(monos):
                if self.degree[i] + self.degree[j] <= order:
                    ia.append(i)
                    ib.append(j)
                    ic.append(self.index[tuple(x + y for x, y in zip(a, b))])
        self.pair_a = np.array(ia)
        self.pair_b = np.array(ib)
        scatter = np.zeros((len(ic), self.size))
        scatter[np.arange(len(ic)), ic] = 1.0
        self.scatter = scatter

        # d/dx_k: new[beta] = (beta_k + 1) c[beta + e_k]
        self.deriv_src = np.zeros((nvars, self.size), dtype=int)
        self.deriv_fac = np.zeros((nvars, self.size))
        for k in range(nvars):
            for i, m in enumerate(monos):
                up = list(m)
                up[k] += 1
                j = self.index.get(tuple(up))
                if j is not None:
                    self.deriv_src[k, i] = j
                    self.deriv_fac[k, i] = up[k]

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a[..., self.pair_a] * b[..., self.pair_b]) @ self.scatter

    def diff(self, c: np.ndarray, k: int) -> np.ndarray:
        return c[..., self.deriv_src[k]] * self.deriv_fac[k]

    def constant(self, value: float) -> np.ndarray:
        c = np.zeros(self.size)
        c[0] = value
        return c


@lru_cache(maxsize=None)
def algebra(nvars: int, order: int) -> JetAlgebra:
    return JetAlgebra(nvars, order)


def _falling(p: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= p - i
    return out


class Jet:
    """Scalar truncated Taylor series; supports ``+ - * / **`` and numpy ufuncs.

    numpy dispatches ``np.sin(jet)`` to ``jet.sin()``, so metric components can
    be written with ordinary numpy calls and evaluated on floats or jets.
    """

    __slots__ = ("alg", "c")
    __array_priority__ = 100

    def __init__(self, alg: JetAlgebra, c: np.ndarray):
        self.alg = alg
        self.c = c

    @classmethod
    def variable(cls, alg: JetAlgebra, k: int, value: float) -> Jet:
        c = alg.constant(value)
        if alg.order >= 1:
            e = [0] * alg.nvars
            e[k] = 1
            c[alg.index[tuple(e)]] = 1.0
        return cls(alg, c)

    @property
    def value(self) -> float:
        return float(self.c[0])

    def derivative(self, alpha: Sequence[int]) -> float:
        """Partial derivative d^alpha f at the base point."""
        alpha = tuple(alpha)
        if sum(alpha) > self.alg.order:
            raise InsufficientOrder(f"order {sum(alpha)} derivative from order-{self.alg.order} jet")
        return float(self.c[self.alg.index[alpha]]) * math.prod(math.factorial(a) for a in alpha)

    def _lift(self, other) -> Jet:
        if isinstance(other, Jet):
            return other
        return Jet(self.alg, self.alg.constant(float(other)))

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.alg, self.c + other.c)
        c = self.c.copy()
        c[0] += other
        return Jet(self.alg, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.alg, -self.c)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.alg, self.alg.mul(self.c, other.c))
        return Jet(self.alg, self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.alg, self.c / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return (self.log() * p).exp()
        if float(p).is_integer() and p >= 0:
            out = self._lift(1.0)
            for _ in range(int(p)):
                out = out * self
            return out
        u0 = self.value
        return self._compose([_falling(p, k) * u0 ** (p - k) for k in range(self.alg.order + 1)])

    def __rpow__(self, base):
        return (self * math.log(base)).exp()

    def _compose(self, derivs: Sequence[float]) -> Jet:
        """f(self) from the derivatives f^(k)(u0), k = 0..order."""
        h = self.c.copy()
        h[0] = 0.0
        out = self.alg.constant(derivs[0])
        power = self.alg.constant(1.0)
        for k in range(1, self.alg.order + 1):
            power = self.alg.mul(power, h)
            out = out + derivs[k] / math.factorial(k) * power
        return Jet(self.alg, out)

    def reciprocal(self) -> Jet:
        u0 = self.value
        if u0 == 0.0:
            raise ZeroDivisionError("jet division by a series with zero constant term")
        return self._compose([(-1) ** k * math.factorial(k) / u0 ** (k + 1) for k in range(self.alg.order + 1)])

    def exp(self):
        e = math.exp(self.value)
        return self._compose([e] * (self.alg.order + 1))

    def log(self):
        u0 = self.value
        if u0 <= 0.0:
            raise ValueError("log of a non-positive jet")
        d = [math.log(u0)] + [(-1) ** (k - 1) * math.factorial(k - 1) / u0**k for k in range(1, self.alg.order + 1)]
        return self._compose(d)

    def sqrt(self):
        return self ** 0.5

    def sin(self):
        s, c = math.sin(self.value), math.cos(self.value)
        cyc = [s, c, -s, -c]
        return self._compose([cyc[k % 4] for k in range(self.alg.order + 1)])

    def cos(self):
        s, c = math.sin(self.value), math.cos(self.value)
        cyc = [c, -s, -c, s]
        return self._compose([cyc[k % 4] for k in range(self.alg.order + 1)])

    def tan(self):
        return self.sin() / self.cos()

    def sinh(self):
        s, c = math.sinh(self.value), math.cosh(self.value)
        return self._compose([s if k % 2 == 0 else c for k in range(self.alg.order + 1)])

    def cosh(self):
        s, c = math.sinh(self.value), math.cosh(self.value)
        return self._compose([c if k % 2 == 0 else s for k in range(self.alg.order + 1)])

    def tanh(self):
        return self.sinh() / self.cosh()

    def __repr__(self) -> str:
        return f"Jet(value={self.value:.6g}, order={self.alg.order}, nvars={self.alg.nvars})"


class JetArray:
    """A tensor of jets: coefficient array of shape ``shape + (alg.size,)``.

    ``order`` is the highest degree that is still exact; it drops by one
    with every :meth:`diff`.
    """

    __slots__ = ("alg", "c", "order")

    def __init__(self, alg: JetAlgebra, c: np.ndarray, order: int | None = None):
        self.alg = alg
        self.c = c
        self.order = alg.order if order is None else order

    @classmethod
    def from_nested(cls, alg: JetAlgebra, entries) -> JetArray:
        arr = np.asarray(entries, dtype=object)
        out = np.zeros(arr.shape + (alg.size,))
        for idx, e in np.ndenumerate(arr):
            out[idx] = e.c if isinstance(e, Jet) else alg.constant(float(e))
        return cls(alg, out)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.c.shape[:-1]

    def value(self) -> np.ndarray:
        return self.c[..., 0].copy()

    def entry(self, idx) -> Jet:
        return Jet(self.alg, self.c[idx])

    def _order_with(self, other: JetArray) -> int:
        return min(self.order, other.order)

    def __add__(self, other: JetArray) -> JetArray:
        return JetArray(self.alg, self.c + other.c, self._order_with(other))

    def __sub__(self, other: JetArray) -> JetArray:
        return JetArray(self.alg, self.c - other.c, self._order_with(other))

    def __neg__(self) -> JetArray:
        return JetArray(self.alg, -self.c, self.order)

    def __mul__(self, s: float) -> JetArray:
        return JetArray(self.alg, self.c * s, self.order)

    __rmul__ = __mul__

    def transpose(self, axes: Sequence[int]) -> JetArray:
        return JetArray(self.alg, np.transpose(self.c, tuple(axes) + (self.c.ndim - 1,)), self.order)

    def diff(self) -> JetArray:
        """Partial derivatives, appended as a new last tensor axis."""
        if self.order < 1:
            raise InsufficientOrder("jet order exhausted")
        parts = [self.alg.diff(self.c, k) for k in range(self.alg.nvars)]
        return JetArray(self.alg, np.stack(parts, axis=-2), self.order - 1)

    def inverse(self) -> JetArray:
        """Matrix inverse of a square jet matrix (Neumann series about the base point)."""
        g0 = self.c[..., 0]
        g0inv = np.linalg.inv(g0)
        h = self.c.copy()
        h[..., 0] = 0.0
        # N = -g0^{-1} h has no constant term, so N^(order+1) vanishes
        N = -np.einsum("ab,bcz->acz", g0inv, h)
        term = np.zeros_like(self.c)
        term[..., 0] = g0inv
        acc = term.copy()
        for _ in range(self.alg.order):
            term = _jcontract(self.alg, N, [0, 1], term, [1, 2], [0, 2])
            acc = acc + term
        return JetArray(self.alg, acc, self.order)


def _batched_contract(A: np.ndarray, sa, B: np.ndarray, sb, sout) -> np.ndarray:
    """``einsum(A, sa, B, sb, sout)`` where the last label of all three is a
    shared batch axis, done as one batched matrix product."""
    sa, sb, sout = list(sa), list(sb), list(sout)
    if len(set(sa)) != len(sa) or len(set(sb)) != len(sb) or any(l in sa and l in sb and l in sout for l in sout[:-1]):
        return np.einsum(A, sa, B, sb, sout)
    z = sout[-1]
    # labels summed within a single operand are reduced first
    a_only = [l for l in sa if l not in sb and l not in sout]
    if a_only:
        keep = [l for l in sa if l not in a_only]
        A, sa = np.einsum(A, sa, keep), keep
    b_only = [l for l in sb if l not in sa and l not in sout]
    if b_only:
        keep = [l for l in sb if l not in b_only]
        B, sb = np.einsum(B, sb, keep), keep
    con = [l for l in sa if l in sb and l != z]
    fa = [l for l in sa if l not in sb]
    fb = [l for l in sb if l not in sa]
    size = {l: d for l, d in zip(sa, A.shape)}
    size.update({l: d for l, d in zip(sb, B.shape)})
    nz, nc = size[z], math.prod(size[l] for l in con)
    na, nb = math.prod(size[l] for l in fa), math.prod(size[l] for l in fb)
    Am = np.transpose(A, [sa.index(l) for l in [z] + fa + con]).reshape(nz, na, nc)
    Bm = np.transpose(B, [sb.index(l) for l in [z] + con + fb]).reshape(nz, nc, nb)
    prod = np.matmul(Am, Bm).reshape([nz] + [size[l] for l in fa + fb])
    order = [z] + fa + fb
    return np.transpose(prod, [order.index(l) for l in sout])


def _jcontract(alg: JetAlgebra, A: np.ndarray, sa, B: np.ndarray, sb, sout) -> np.ndarray:
    z = 50  # label for the coefficient-pair axis
    prod = _batched_contract(A[..., alg.pair_a], list(sa) + [z], B[..., alg.pair_b], list(sb) + [z], list(sout) + [z])
    return np.ascontiguousarray(prod) @ alg.scatter


def jeinsum(A, sa: Sequence[int], B, sb: Sequence[int], sout: Sequence[int]) -> JetArray:
    """Einstein summation of two jet tensors in numpy's sublist format.

    Either operand may be a plain ndarray, treated as a constant tensor.
    """
    if not isinstance(A, JetArray):
        c = np.einsum(np.asarray(A, dtype=float), list(sa), B.c, list(sb) + [50], list(sout) + [50])
        return JetArray(B.alg, c, B.order)
    if not isinstance(B, JetArray):
        c = np.einsum(A.c, list(sa) + [50], np.asarray(B, dtype=float), list(sb), list(sout) + [50])
        return JetArray(A.alg, c, A.order)
    return JetArray(A.alg, _jcontract(A.alg, A.c, sa, B.c, sb, sout), min(A.order, B.order))
