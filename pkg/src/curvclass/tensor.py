"""Dense pointwise tensors and the algebraic curvature operators.

Everything here acts on component arrays at a single point. Slots are
numbered from 0, so the Ricci contraction of a (0,4) tensor ``R`` is
``metric_contract(R, 0, 3, m)``.

Two scalar kinds are supported: ``float`` (float64 arrays) and
``rational`` (object arrays of :class:`fractions.Fraction`). Rational mode
is exact and is what the algebraic identities are checked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "Metric",
    "TensorError",
    "permute",
    "linear_combine",
    "outer",
    "metric_contract",
    "kulkarni_nomizu",
    "curvature_dot",
    "q_operator",
    "oneform_action",
    "metric_inner",
    "component_inner",
    "max_norm",
    "is_zero",
    "gct_symmetry_residuals",
    "zeros",
]


class TensorError(ValueError):
    pass


def _kind_of(arr: np.ndarray) -> str:
    return "rational" if arr.dtype == object else "float"


_to_fraction = np.vectorize(Fraction, otypes=[object])


def _as_array(data, kind: str | None) -> np.ndarray:
    if kind == "rational":
        return _to_fraction(np.asarray(data, dtype=object))
    if isinstance(data, np.ndarray) and data.dtype == object:
        return data
    return np.asarray(data, dtype=float)


@dataclass(frozen=True, eq=False)
class Tensor:
    """Components of a (u,k) tensor at a point, ``u`` in {0, 1}.

    ``data`` has shape ``(dim,) * (u + k)``; for u = 1 the first axis is the
    raised one. Instances are read-only.
    """

    data: np.ndarray
    dim: int
    contravariant: int = 0

    def __init__(self, data, dim: int | None = None, contravariant: int = 0, kind: str | None = None):
        arr = _as_array(data, kind)
        if dim is None:
            if arr.ndim == 0:
                raise TensorError("dim is required for a rank-0 tensor")
            dim = arr.shape[0]
        if any(s != dim for s in arr.shape):
            raise TensorError(f"shape {arr.shape} is not a power of dim {dim}")
        if contravariant not in (0, 1) or contravariant > arr.ndim:
            raise TensorError("contravariant rank must be 0 or 1")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "contravariant", int(contravariant))

    @property
    def rank(self) -> int:
        return self.data.ndim

    @property
    def valence(self) -> tuple[int, int]:
        return (self.contravariant, self.rank - self.contravariant)

    @property
    def scalar_kind(self) -> str:
        return _kind_of(self.data)

    @property
    def flat(self) -> np.ndarray:
        return self.data.ravel()

    def __getitem__(self, idx):
        return self.data[idx]

    def __repr__(self) -> str:
        return f"Tensor(dim={self.dim}, valence={self.valence}, kind={self.scalar_kind})"

    def __add__(self, other: Tensor) -> Tensor:
        return linear_combine([(1, self), (1, other)])

    def __sub__(self, other: Tensor) -> Tensor:
        return linear_combine([(1, self), (-1, other)])

    def __neg__(self) -> Tensor:
        return Tensor(-self.data, self.dim, self.contravariant)

    def __mul__(self, s) -> Tensor:
        return Tensor(self.data * s, self.dim, self.contravariant)

    __rmul__ = __mul__

    def to_float(self) -> Tensor:
        return Tensor(np.asarray(self.data, dtype=float), self.dim, self.contravariant)

    def to_json(self) -> dict:
        if self.scalar_kind == "rational":
            data = [str(Fraction(x)) for x in self.flat]
        else:
            data = [float(x) for x in self.flat]
        return {"dim": self.dim, "valence": list(self.valence), "data": data}

    @classmethod
    def from_json(cls, obj: dict) -> Tensor:
        dim = int(obj["dim"])
        u, k = obj["valence"]
        data = obj["data"]
        rational = any(isinstance(x, str) for x in data)
        arr = _as_array(data, "rational" if rational else None)
        if arr.size != dim ** (u + k):
            raise TensorError("data length does not match dim and valence")
        return cls(arr.reshape((dim,) * (u + k)), dim, u)


def zeros(dim: int, rank: int, kind: str = "float") -> Tensor:
    if kind == "rational":
        arr = np.empty((dim,) * rank, dtype=object)
        arr[...] = Fraction(0)
        return Tensor(arr, dim)
    return Tensor(np.zeros((dim,) * rank), dim)


@dataclass(frozen=True, eq=False)
class Metric:
    """A nondegenerate symmetric bilinear form at a point plus its inverse."""

    g: Tensor
    g_inv: Tensor

    @classmethod
    def from_array(cls, g, kind: str | None = None) -> Metric:
        gt = Tensor(g, kind=kind)
        if gt.rank != 2:
            raise TensorError("metric must be a (0,2) tensor")
        a = gt.data
        if gt.scalar_kind == "rational":
            if not all(a[i, j] == a[j, i] for i in range(gt.dim) for j in range(gt.dim)):
                raise TensorError("metric is not symmetric")
            import sympy

            m = sympy.Matrix(gt.dim, gt.dim, [sympy.Rational(x.numerator, x.denominator) for x in a.ravel()])
            if m.det() == 0:
                raise TensorError("metric is degenerate")
            inv = _to_fraction(np.array(m.inv().tolist(), dtype=object).astype(str))
        else:
            scale = max(np.abs(a).max(), 1.0)
            if np.abs(a - a.T).max() > 1e-12 * scale:
                raise TensorError("metric is not symmetric")
            if np.linalg.cond(a) > 1e14:
                raise TensorError("metric is degenerate")
            inv = np.linalg.inv(a)
        return cls(gt, Tensor(inv, gt.dim))

    @classmethod
    def euclidean(cls, n: int, kind: str = "float") -> Metric:
        if kind == "rational":
            eye = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
            return cls(Tensor(eye), Tensor(eye))
        return cls(Tensor(np.eye(n)), Tensor(np.eye(n)))

    @property
    def dim(self) -> int:
        return self.g.dim


def _check_same(*tensors: Tensor) -> None:
    t0 = tensors[0]
    for t in tensors[1:]:
        if t.dim != t0.dim:
            raise TensorError(f"dimension mismatch: {t0.dim} vs {t.dim}")
        if t.scalar_kind != t0.scalar_kind:
            raise TensorError("scalar kind mismatch")


def _covariant(t: Tensor, what: str) -> None:
    if t.contravariant:
        raise TensorError(f"{what} must be a (0,k) tensor")


def permute(T: Tensor, sigma: Sequence[int]) -> Tensor:
    """Move slot ``m`` of ``T`` to slot ``sigma[m]``.

    ``out[i_sigma(0), ..., i_sigma(k-1)] = T[i_0, ..., i_{k-1}]``.
    """
    sigma = list(sigma)
    if len(sigma) != T.rank:
        raise TensorError(f"permutation of length {len(sigma)} for rank {T.rank}")
    if sorted(sigma) != list(range(T.rank)):
        raise TensorError("sigma is not a permutation")
    axes = [0] * T.rank
    for m, s in enumerate(sigma):
        axes[s] = m
    return Tensor(np.transpose(T.data, axes), T.dim, T.contravariant)


def linear_combine(terms: Iterable[tuple[object, Tensor]]) -> Tensor:
    terms = list(terms)
    if not terms:
        raise TensorError("empty combination")
    tensors = [t for _, t in terms]
    _check_same(*tensors)
    shape = tensors[0].data.shape
    if any(t.data.shape != shape or t.contravariant != tensors[0].contravariant for t in tensors):
        raise TensorError("shape mismatch in combination")
    acc = terms[0][0] * tensors[0].data
    for s, t in terms[1:]:
        acc = acc + s * t.data
    return Tensor(acc, tensors[0].dim, tensors[0].contravariant)


def outer(A: Tensor, B: Tensor) -> Tensor:
    _check_same(A, B)
    _covariant(A, "A")
    _covariant(B, "B")
    return Tensor(np.multiply.outer(A.data, B.data), A.dim)


def metric_contract(T: Tensor, i: int, j: int, m: Metric) -> Tensor:
    """Trace ``g^{ab}`` over slots ``i < j`` (0-based) of a (0,k) tensor."""
    _covariant(T, "T")
    k = T.rank
    if not (0 <= i < j < k):
        raise TensorError(f"invalid contraction slots ({i}, {j}) for rank {k}")
    _check_same(T, m.g)
    sub = list(range(k))
    a, b = k, k + 1
    sub[i], sub[j] = a, b
    out = [s for s in range(k) if s not in (i, j)]
    return Tensor(np.einsum(T.data, sub, m.g_inv.data, [a, b], out), T.dim)


def kulkarni_nomizu(A: Tensor, E: Tensor) -> Tensor:
    """(A ∧ E)_{ijkl} = A_il E_jk + A_jk E_il - A_ik E_jl - A_jl E_ik."""
    _check_same(A, E)
    if A.rank != 2 or E.rank != 2:
        raise TensorError("Kulkarni-Nomizu product needs two (0,2) tensors")
    a, e = A.data, E.data
    out = (
        np.einsum("il,jk->ijkl", a, e)
        + np.einsum("jk,il->ijkl", a, e)
        - np.einsum("ik,jl->ijkl", a, e)
        - np.einsum("jl,ik->ijkl", a, e)
    )
    return Tensor(out, A.dim)


def _integer_form(arr: np.ndarray) -> tuple[np.ndarray, int]:
    """``arr = ints / den`` with a common denominator (Fraction object arrays)."""
    den = math.lcm(*(x.denominator if type(x) is Fraction else Fraction(x).denominator for x in arr.flat)) if arr.size else 1
    ints = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        if type(x) is not Fraction:
            x = Fraction(x)
        ints[idx] = x.numerator * (den // x.denominator)
    return ints, den


def _to_fractions(ints: np.ndarray, den: int) -> np.ndarray:
    out = np.empty(ints.shape, dtype=object)
    for idx, v in np.ndenumerate(ints):
        out[idx] = Fraction(int(v), den)
    return out


def _einsum(A: np.ndarray, sa, B: np.ndarray, sb, sout) -> np.ndarray:
    """Two-operand einsum; rational operands are contracted over integers."""
    if A.dtype != object and B.dtype != object:
        return np.einsum(A, sa, B, sb, sout)
    ia, da = _integer_form(A)
    ib, db = _integer_form(B)
    return _to_fractions(np.einsum(ia, sa, ib, sb, sout), da * db)


def _act_on_slots(T: np.ndarray, E: np.ndarray, extra: int, antisym: bool = False) -> np.ndarray:
    """Sum over slots m of E[..., i_m, a] T[..., a at m, ...].

    ``E`` has ``extra`` leading free axes which are appended to the output
    after the slots of ``T``; ``antisym`` subtracts the transpose of the
    last two output axes. Rational input is summed exactly over integers
    (int64 when a magnitude bound rules out overflow).
    """
    den = None
    if T.dtype == object or E.dtype == object:
        T, dt = _integer_form(T)
        E, de = _integer_form(E)
        den = dt * de
        bound = max(map(abs, T.flat), default=0) * max(map(abs, E.flat), default=0) * T.shape[0] * max(T.ndim, 1)
        if bound < 2**62:
            T, E = T.astype(np.int64), E.astype(np.int64)
    k = T.ndim
    free = list(range(k + 1, k + 1 + extra))
    acc = None
    for m in range(k):
        t_sub = list(range(k))
        t_sub[m] = k  # summed index a
        e_sub = free + [m, k]
        term = np.einsum(T, t_sub, E, e_sub, list(range(k)) + free)
        acc = term if acc is None else acc + term
    if antisym:
        acc = acc - np.swapaxes(acc, -1, -2)
    return acc if den is None else _to_fractions(acc, den)


def curvature_dot(D: Tensor, T: Tensor, m: Metric) -> Tensor:
    """D·T, the action of the curvature operator D(X, Y) on T.

    ``out[i_1..i_k, x, y] = -sum_m g^{ab} D[x, y, i_m, b] T[.., a at m, ..]``
    """
    _check_same(D, T, m.g)
    _covariant(T, "T")
    if D.rank != 4:
        raise TensorError("D must be a (0,4) tensor")
    if T.rank == 0:
        return zeros(T.dim, 2, T.scalar_kind)
    endo = _einsum(D.data, [0, 1, 2, 3], m.g_inv.data, [4, 3], [0, 1, 2, 4])
    return Tensor(-_act_on_slots(T.data, endo, 2), T.dim)


def q_operator(A: Tensor, T: Tensor) -> Tensor:
    """Tachibana tensor Q(A, T).

    ``out[.., x, y] = sum_m A[x, i_m] T[.. y at m ..] - A[y, i_m] T[.. x at m ..]``
    """
    _check_same(A, T)
    _covariant(T, "T")
    if A.rank != 2:
        raise TensorError("A must be a (0,2) tensor")
    if T.rank == 0:
        return zeros(T.dim, 2, T.scalar_kind)
    # E[x, y, i, a] = A[x, i] delta[y, a]
    n = T.dim
    if T.scalar_kind == "rational":
        eye = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    else:
        eye = np.eye(n)
    E = _einsum(A.data, [0, 2], eye, [1, 3], [0, 1, 2, 3])
    return Tensor(_act_on_slots(T.data, E, 2, antisym=True), T.dim)


def oneform_action(Pi: Tensor, T: Tensor) -> Tensor:
    """(Π_X T)(X_1..X_k) = -sum_m Π(X_m) T(.. X at m ..); X is the last slot."""
    _check_same(Pi, T)
    _covariant(T, "T")
    if Pi.rank != 1:
        raise TensorError("Pi must be a 1-form")
    n = T.dim
    if T.scalar_kind == "rational":
        eye = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    else:
        eye = np.eye(n)
    E = np.einsum("i,xa->xia", Pi.data, eye)
    return Tensor(-_act_on_slots(T.data, E, 1), T.dim)


def metric_inner(T: Tensor, U: Tensor, m: Metric):
    """g^{i1 j1} ... g^{ik jk} T_{i..} U_{j..}. Can vanish on null tensors."""
    _check_same(T, U, m.g)
    x = U.data
    for _ in range(U.rank):
        # raise the first axis and rotate it to the back
        x = np.moveaxis(np.tensordot(m.g_inv.data, x, axes=([1], [0])), 0, -1)
    return np.sum(T.data * x)


def component_inner(T: Tensor, U: Tensor):
    _check_same(T, U)
    return np.sum(T.data * U.data)


def max_norm(T: Tensor) -> float:
    if T.data.size == 0:
        return 0.0
    return float(np.max(np.abs(np.asarray(T.data, dtype=float))))


def is_zero(T: Tensor, tol: float = 1e-9, scale: float | None = None) -> bool:
    """Zero test; exact for rational tensors, relative ``tol`` otherwise."""
    if T.scalar_kind == "rational":
        return all(x == 0 for x in T.flat)
    ref = 1.0 if scale is None else max(scale, np.finfo(float).tiny)
    return max_norm(T) <= tol * ref


def gct_symmetry_residuals(D: Tensor) -> dict[str, float]:
    """Max-norm residuals of the three generalized-curvature-tensor axioms."""
    d = np.asarray(D.data, dtype=float)
    return {
        "skew_12": float(np.abs(d + np.einsum("jikl->ijkl", d)).max()),
        "pair_symmetry": float(np.abs(d - np.einsum("klij->ijkl", d)).max()),
        "bianchi_1": float(np.abs(d + np.einsum("jkil->ijkl", d) + np.einsum("kijl->ijkl", d)).max()),
    }
