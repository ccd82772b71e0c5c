"""Pointwise verification of curvature restrictions.

Every condition is reduced, at each sample point, to a linear system

    fixed + sum_u x_u * basis_u = 0

in the unknown scalars / 1-form components ``x_u`` and solved by linear
least squares (minimum-norm when underdetermined). The derivative slot of
``∇T`` is always the last one, so ``Π(X) ⊗ T`` is ``out[..., x] = Π[x] T[...]``.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import tensor as tc
from .btensor import BCoefficients, build_tensor, generic
from .engine import MetricField, covariant_derivative, curvature_package
from .tensor import Metric, Tensor

__all__ = [
    "TOL_FLAT",
    "TOL_DEPTH1",
    "TOL_DEPTH2",
    "LinearCondition",
    "PointResult",
    "ConditionReport",
    "TensorField",
    "fit_linear_condition",
    "check_flat",
    "check_symmetric",
    "fit_recurrence",
    "check_generalized_recurrent_family",
    "check_chaki_pseudosymmetric",
    "check_weak_symmetry",
    "check_semisymmetric_type",
    "check_pseudosymmetric_type",
    "fit_deszcz_L",
    "check_order2_family",
    "default_points",
    "nabla2_xy",
]

TOL_FLAT = 1e-9
TOL_DEPTH1 = 1e-7
TOL_DEPTH2 = 1e-6
# a basis block whose norm is below this (relative) is treated as absent
ZERO_BLOCK = 1e-10


def _env_tol(default: float) -> float:
    val = os.environ.get("CURVCLASS_TOL")
    return float(val) if val else default


def _norm(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.abs(x).max()) if x.size else 0.0


def _arr(T) -> np.ndarray:
    return np.asarray(T.data if isinstance(T, Tensor) else T, dtype=float)


@dataclass(frozen=True)
class LinearCondition:
    """``fixed + Σ x_u basis_u = 0`` at one point.

    ``basis`` entries are ``(unknown_id, slot, tensor)``: ``unknown_id`` names
    the unknown (``"Pi"``, ``"Phi"``, ``"alpha_swap"``...), ``slot`` is the
    component index inside it (``()`` for a scalar, ``(a,)`` for a 1-form).
    ``scale`` sets the reference magnitude for the relative residual.
    """

    fixed: np.ndarray
    basis: tuple[tuple[str, tuple[int, ...], np.ndarray], ...]
    scale: float | None = None
    subject_norm: float | None = None

    def __post_init__(self):
        fixed = _arr(self.fixed)
        basis = tuple((uid, tuple(slot), _arr(t)) for uid, slot, t in self.basis)
        for uid, slot, t in basis:
            if t.shape != fixed.shape:
                raise tc.TensorError(f"basis term {uid}{list(slot)} has shape {t.shape}, expected {fixed.shape}")
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "basis", basis)

    @property
    def unknown_ids(self) -> list[str]:
        seen: list[str] = []
        for uid, _, _ in self.basis:
            if uid not in seen:
                seen.append(uid)
        return seen


@dataclass
class PointResult:
    coords: list[float]
    residual: float
    unknowns: dict = field(default_factory=dict)
    degenerate: bool = False
    underdetermined: bool = False
    note: str = ""
    # unknown blocks whose basis vanishes; the point is degenerate only if
    # the remaining blocks cannot absorb the fixed term
    vanishing: list = field(default_factory=list)

    def is_degenerate(self, tol: float) -> bool:
        return self.degenerate or (bool(self.vanishing) and self.residual > tol)

    def to_json(self, tol: float | None = None) -> dict:
        out = {"coords": self.coords, "residual": self.residual, "unknowns": self.unknowns}
        if self.degenerate or (tol is not None and self.is_degenerate(tol)):
            out["degenerate"] = True
        if self.underdetermined:
            out["underdetermined"] = True
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class ConditionReport:
    condition: str
    points: list[PointResult]
    tolerance: float
    tensor: str = ""
    metric: str = ""

    @property
    def verdict(self) -> str:
        live = [p for p in self.points if not p.is_degenerate(self.tolerance)]
        if any(p.residual > self.tolerance for p in live):
            return "fails"
        if len(live) < len(self.points):
            return "degenerate"
        return "holds"

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"

    @property
    def max_residual(self) -> float:
        return max((p.residual for p in self.points), default=0.0)

    def unknown(self, name: str, point: int = 0) -> np.ndarray:
        return np.asarray(self.points[point].unknowns[name])

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "metric": self.metric,
            "tensor": self.tensor,
            "points": [p.to_json(self.tolerance) for p in self.points],
            "verdict": self.verdict,
            "tolerance": self.tolerance,
        }


# ----------------------------------------------------------- tensor fields

@dataclass(frozen=True, eq=False)
class TensorField:
    """A (0,k) tensor field built from the curvature of ``metric``.

    ``what`` is one of ``"g"``, ``"R"``, ``"S"``, ``"r"``, a catalog name
    such as ``"W"`` or ``"P*"``, or explicit :class:`BCoefficients`.
    """

    metric: MetricField
    what: str | BCoefficients = "R"
    label: str = ""

    def __post_init__(self):
        if isinstance(self.what, str) and self.what not in ("g", "R", "S", "r"):
            object.__setattr__(self, "what", generic(self.what, self.metric.dim))
        if not self.label:
            w = self.what
            object.__setattr__(self, "label", w if isinstance(w, str) else (w.name or "B"))

    def values(self, point, order: int) -> list[np.ndarray]:
        """``[T, ∇T, ∇²T][: order + 1]`` at ``point``."""
        w = self.what
        if w == "g":
            out = [self.metric.at(point).g.data]
            for k in range(1, order + 1):
                out.append(covariant_derivative(self.metric, point, "g", k).data)
            return [np.asarray(x, dtype=float) for x in out]
        pkg = curvature_package(self.metric, point, order)
        if isinstance(w, BCoefficients):
            return [build_tensor(w, pkg, k).data for k in range(order + 1)]
        return [np.asarray(pkg.derivative(w, k).data, dtype=float) for k in range(order + 1)]


def default_points(metric: MetricField, count: int = 8, seed: int = 0) -> list[np.ndarray]:
    return metric.sample_points(count, seed)


def _points(field: TensorField, pts) -> list[np.ndarray]:
    return default_points(field.metric) if pts is None else [np.asarray(p, dtype=float) for p in pts]


# -------------------------------------------------------------- fitting

def _solve(cond: LinearCondition, point=None) -> PointResult:
    coords = [] if point is None else [float(v) for v in point]
    fixed = cond.fixed
    ref = max([_norm(fixed)] + [_norm(t) for _, _, t in cond.basis])
    scale = cond.scale if cond.scale is not None else ref
    unknowns: dict[str, list] = {}
    if not cond.basis:
        res = _norm(fixed)
        return PointResult(coords, res / scale if scale > 0 else 0.0, unknowns)

    if cond.subject_norm is not None and cond.subject_norm <= ZERO_BLOCK * max(1.0, ref):
        return PointResult(coords, 0.0, unknowns, degenerate=True, note="tensor vanishes at this point")
    dead = []
    for uid in cond.unknown_ids:
        block = max(_norm(t) for u, _, t in cond.basis if u == uid)
        if block <= ZERO_BLOCK * max(1.0, ref):
            dead.append(uid)

    A = np.stack([t.ravel() for _, _, t in cond.basis], axis=1)
    x, _, rank, _ = np.linalg.lstsq(A, -fixed.ravel(), rcond=None)
    resid = fixed.ravel() + A @ x
    for (uid, slot, _), val in zip(cond.basis, x):
        unknowns.setdefault(uid, {})[slot] = float(val)
    packed = {}
    for uid, comps in unknowns.items():
        if list(comps) == [()]:
            packed[uid] = comps[()]
        else:
            shape = tuple(max(s[d] for s in comps) + 1 for d in range(len(next(iter(comps)))))
            arr = np.zeros(shape)
            for s, v in comps.items():
                arr[s] = v
            packed[uid] = arr.tolist()
    res = _norm(resid) / scale if scale > 0 else 0.0
    note = f"basis for {', '.join(dead)} vanishes" if dead else ""
    return PointResult(coords, res, packed, underdetermined=rank < A.shape[1], note=note, vanishing=dead)


def fit_linear_condition(
    cond: LinearCondition | Sequence[LinearCondition],
    tol: float | None = None,
    name: str = "linear-condition",
    points: Sequence | None = None,
) -> ConditionReport:
    """Least-squares fit of the unknowns at each point, with residual and verdict."""
    conds = [cond] if isinstance(cond, LinearCondition) else list(cond)
    pts = points if points is not None else [None] * len(conds)
    results = [_solve(c, p) for c, p in zip(conds, pts)]
    return ConditionReport(name, results, _env_tol(TOL_DEPTH1) if tol is None else tol)


def _dirac(n: int, a: int) -> np.ndarray:
    e = np.zeros(n)
    e[a] = 1.0
    return e


def _otimes_last(form: np.ndarray, T: np.ndarray) -> np.ndarray:
    """``out[..., x] = form[x] T[...]``."""
    return np.multiply.outer(T, form)


def _oneform_action(Pi: np.ndarray, T: np.ndarray) -> np.ndarray:
    n = Pi.shape[0]
    return np.asarray(tc.oneform_action(Tensor(Pi, n), Tensor(T, n)).data)


def _recurrence_basis(n: int, T: np.ndarray, uid: str = "Pi", sign: float = -1.0):
    return [(uid, (a,), sign * _otimes_last(_dirac(n, a), T)) for a in range(n)]


def _report(name: str, field: TensorField, results: list[PointResult], tol: float) -> ConditionReport:
    return ConditionReport(name, results, tol, tensor=field.label, metric=field.metric.name)


# ----------------------------------------------------------- conditions

def check_flat(T, pts=None, tol: float | None = None, scale: float | None = None) -> ConditionReport:
    """``T = 0``. ``T`` is a Tensor (single point) or a :class:`TensorField`.

    For fields the residual is relative to ``max(1, |R|)`` at each point.
    """
    tol = _env_tol(TOL_FLAT) if tol is None else tol
    if isinstance(T, TensorField):
        results = []
        for p in _points(T, pts):
            val = T.values(p, 0)[0]
            ref = max(1.0, _norm(curvature_package(T.metric, p, 0).R.data)) if scale is None else scale
            results.append(PointResult([float(v) for v in p], _norm(val) / ref))
        return _report("flat", T, results, tol)
    ref = 1.0 if scale is None else max(scale, 1e-300)
    return ConditionReport("flat", [PointResult([], _norm(_arr(T)) / ref)], tol)


def check_symmetric(field: TensorField, pts=None, tol: float | None = None) -> ConditionReport:
    """``∇T = 0``; residual ``|∇T| / max(1, |T|)``."""
    tol = _env_tol(TOL_DEPTH1) if tol is None else tol
    results = []
    for p in _points(field, pts):
        T, dT = field.values(p, 1)
        results.append(PointResult([float(v) for v in p], _norm(dT) / max(1.0, _norm(T))))
    return _report("symmetric", field, results, tol)


def fit_recurrence(field: TensorField, pts=None, tol: float | None = None, pairing: str = "component") -> ConditionReport:
    """``∇T = Π ⊗ T`` with ``Π_x = <∇_x T, T> / <T, T>``.

    ``pairing="component"`` uses the Euclidean pairing of components (the
    least-squares solution); ``pairing="metric"`` uses the metric pairing,
    which vanishes identically on null tensors such as plane-wave curvature
    and is then reported degenerate.
    """
    tol = _env_tol(TOL_DEPTH1) if tol is None else tol
    results = []
    for p in _points(field, pts):
        T, dT = field.values(p, 1)
        n = T.shape[0] if T.ndim else field.metric.dim
        coords = [float(v) for v in p]
        if pairing == "metric":
            m = field.metric.at(p)
            Tt = Tensor(T, n)
            den = float(tc.metric_inner(Tt, Tt, m))
            num = np.array([float(tc.metric_inner(Tensor(dT[..., x], n), Tt, m)) for x in range(n)])
            ref = max(_norm(T) ** 2, 1e-300)
        elif pairing == "component":
            den = float(np.sum(T * T))
            num = np.array([float(np.sum(dT[..., x] * T)) for x in range(n)])
            ref = max(_norm(T) ** 2, 1e-300)
        else:
            raise ValueError(f"unknown pairing {pairing!r}")
        if abs(den) <= ZERO_BLOCK**2 * max(1.0, ref) or _norm(T) <= ZERO_BLOCK:
            results.append(PointResult(coords, 0.0, {}, degenerate=True, note="<T,T> vanishes"))
            continue
        Pi = num / den
        res = _norm(dT - _otimes_last(Pi, T)) / max(_norm(T), _norm(dT))
        results.append(PointResult(coords, res, {"Pi": Pi.tolist()}))
    return _report("recurrent", field, results, tol)


def _recurrence_condition(T: np.ndarray, dT: np.ndarray, extra_blocks) -> LinearCondition:
    n = T.shape[0]
    basis = _recurrence_basis(n, T)
    for uid, S in extra_blocks:
        basis += [(uid, (a,), -_otimes_last(_dirac(n, a), S)) for a in range(n)]
    return LinearCondition(dT, tuple(basis), scale=max(_norm(T), _norm(dT)), subject_norm=_norm(T))


VARIANTS = ("generalized", "hyper", "weakly", "quasi", "super")


def check_generalized_recurrent_family(
    field: TensorField, pts=None, variant: str = "generalized", psi=None, tol: float | None = None
) -> ConditionReport:
    """``∇T = Π⊗T + Φ⊗E (+ ...)`` with source terms by variant.

    generalized: E = G = ½ g∧g; hyper: E = g∧S; weakly: E = S∧S;
    quasi: E = g∧(g + Ψ⊗Ψ) with Ψ given (array or callable of the point);
    super: Φ⊗G + Ψ⊗g∧S + Θ⊗S∧S, with Ψ fitted as well.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if variant == "quasi" and psi is None:
        raise ValueError("the quasi variant needs the 1-form psi")
    tol = _env_tol(TOL_DEPTH1) if tol is None else tol
    results = []
    pts = _points(field, pts)
    for p in pts:
        T, dT = field.values(p, 1)
        if T.ndim != 4:
            raise tc.TensorError("generalized recurrency is defined for (0,4) tensors only")
        pkg = curvature_package(field.metric, p, 0)
        g, S = pkg.g, pkg.S
        G = 0.5 * np.asarray(tc.kulkarni_nomizu(g, g).data)
        gS = np.asarray(tc.kulkarni_nomizu(g, S).data)
        SS = np.asarray(tc.kulkarni_nomizu(S, S).data)
        if variant == "generalized":
            blocks = [("Phi", G)]
        elif variant == "hyper":
            blocks = [("Phi", gS)]
        elif variant == "weakly":
            blocks = [("Phi", SS)]
        elif variant == "quasi":
            v = np.asarray(psi(p) if callable(psi) else psi, dtype=float)
            E = g.data + np.outer(v, v)
            blocks = [("Phi", np.asarray(tc.kulkarni_nomizu(g, Tensor(E)).data))]
        else:
            blocks = [("Phi", G), ("Psi", gS), ("Theta", SS)]
        results.append(_solve(_recurrence_condition(T, dT, blocks), p))
    return _report(f"{variant}-recurrent", field, results, tol)


def check_chaki_pseudosymmetric(field: TensorField, pts=None, tol: float | None = None) -> ConditionReport:
    """``∇_X T - 2Π(X) T + Π_X T = 0``."""
    tol = _env_tol(TOL_DEPTH1) if tol is None else tol
    results = []
    for p in _points(field, pts):
        T, dT = field.values(p, 1)
        n = field.metric.dim
        basis = []
        for a in range(n):
            e = _dirac(n, a)
            basis.append(("Pi", (a,), -2.0 * _otimes_last(e, T) + _oneform_action(e, T)))
        cond = LinearCondition(dT, tuple(basis), scale=max(_norm(T), _norm(dT)), subject_norm=_norm(T))
        results.append(_solve(cond, p))
    return _report("chaki-pseudosymmetric", field, results, tol)


def _weak_type1_basis(T: np.ndarray, n: int):
    """Terms Π^σ(Y_σ0) T(Y_σ1..Y_σk) laid out as [Y_1..Y_k, Y_0]."""
    k = T.ndim
    basis = []
    for sigma in itertools.permutations(range(k + 1)):
        label = "Pi_" + "".join(str(s) for s in sigma)
        for a in range(n):
            # U[y_0..y_k] = e_a[y_σ0] T[y_σ1..y_σk]
            U = np.einsum(_dirac(n, a), [sigma[0]], T, list(sigma[1:]), list(range(k + 1)))
            basis.append((label, (a,), -np.moveaxis(U, 0, -1)))
    return basis


def check_weak_symmetry(field: TensorField, pts=None, type: str = "I", tol: float | None = None) -> ConditionReport:
    """Weak symmetry of type I, II or III.

    I:   ∇_X T(X_2..X_{k+1}) = Σ_σ Π^σ(X_σ1) T(X_σ2, .., X_σ(k+1)), all σ.
    II:  ∇_X T = Φ(X) T + Σ_i Π_i(X_i) T(.., X at i, ..).
    III: ∇_X T - Φ(X) T + Π_X T = 0.
    """
    kind = type.upper()
    if kind not in ("I", "II", "III"):
        raise ValueError("type must be I, II or III")
    tol = _env_tol(TOL_DEPTH1) if tol is None else tol
    results = []
    for p in _points(field, pts):
        T, dT = field.values(p, 1)
        n = field.metric.dim
        k = T.ndim
        if kind == "I":
            basis = _weak_type1_basis(T, n)
        elif kind == "II":
            basis = _recurrence_basis(n, T, "Phi")
            for m in range(k):
                for a in range(n):
                    # δ_{a i_m} T[.. x at m ..] in layout [i_1..i_k, x]
                    sub = list(range(k))
                    sub[m] = k
                    U = np.einsum(_dirac(n, a), [m], T, sub, list(range(k + 1)))
                    basis.append((f"Pi_{m + 1}", (a,), -U))
        else:
            basis = _recurrence_basis(n, T, "Phi")
            basis += [("Pi", (a,), _oneform_action(_dirac(n, a), T)) for a in range(n)]
        cond = LinearCondition(dT, tuple(basis), scale=max(_norm(T), _norm(dT)), subject_norm=_norm(T))
        results.append(_solve(cond, p))
    return _report(f"weakly-symmetric-{kind}", field, results, tol)


def check_semisymmetric_type(D, T, m: Metric, tol: float | None = None) -> ConditionReport:
    """``D·T = 0`` at one point; residual relative to ``|D| |T|``."""
    tol = _env_tol(TOL_FLAT) if tol is None else tol
    Dt = D if isinstance(D, Tensor) else Tensor(D)
    Tt = T if isinstance(T, Tensor) else Tensor(T)
    val = np.asarray(tc.curvature_dot(Dt, Tt, m).data, dtype=float)
    scale = max(_norm(Dt.data) * _norm(Tt.data), 1e-300)
    res = _norm(val) / scale if _norm(val) > 0 else 0.0
    return ConditionReport("semisymmetric", [PointResult([], res)], tol)


def check_pseudosymmetric_type(Ds: Sequence, T, m: Metric, tol: float | None = None) -> ConditionReport:
    """``(D_0 + Σ_{i≥1} c_i D_i)·T = 0`` with the c_i fitted (c_0 fixed to 1)."""
    if len(Ds) < 2:
        raise ValueError("need at least two curvature tensors")
    tol = _env_tol(TOL_FLAT) if tol is None else tol
    Tt = T if isinstance(T, Tensor) else Tensor(T)
    acts = [np.asarray(tc.curvature_dot(D if isinstance(D, Tensor) else Tensor(D), Tt, m).data, dtype=float) for D in Ds]
    basis = tuple((f"c{i}", (), acts[i]) for i in range(1, len(Ds)))
    scale = max(max(_norm(a) for a in acts), 1e-300)
    cond = LinearCondition(acts[0], basis, scale=scale, subject_norm=_norm(Tt.data))
    rep = fit_linear_condition(cond, tol, "pseudosymmetric-type")
    return rep


def fit_deszcz_L(D, T, m: Metric, A=None, tol: float | None = None, pairing: str = "component") -> ConditionReport:
    """``D·T = L Q(A, T)`` with ``L = <D·T, Q> / <Q, Q>``; ``A = g`` by default."""
    tol = _env_tol(TOL_FLAT) if tol is None else tol
    Dt = D if isinstance(D, Tensor) else Tensor(D)
    Tt = T if isinstance(T, Tensor) else Tensor(T)
    At = m.g if A is None else (A if isinstance(A, Tensor) else Tensor(A))
    DT = tc.curvature_dot(Dt, Tt, m)
    Q = tc.q_operator(At, Tt)
    dt, q = np.asarray(DT.data, dtype=float), np.asarray(Q.data, dtype=float)
    name = "deszcz-pseudosymmetric" if A is None else "ricci-generalized-pseudosymmetric"
    scale = max(_norm(dt), _norm(q) * max(1.0, _norm(Dt.data)), 1e-300)
    if _norm(q) <= ZERO_BLOCK * max(1.0, _norm(Tt.data)):
        res = _norm(dt) / scale if _norm(dt) > 0 else 0.0
        if res <= tol:
            return ConditionReport(name, [PointResult([], res, {"L": 0.0})], tol)
        return ConditionReport(name, [PointResult([], res, {}, degenerate=True, note="Q(A,T) vanishes")], tol)
    if pairing == "metric":
        den = float(tc.metric_inner(Q, Q, m))
        num = float(tc.metric_inner(DT, Q, m))
    else:
        den = float(np.sum(q * q))
        num = float(np.sum(dt * q))
    if abs(den) <= 1e-300:
        return ConditionReport(name, [PointResult([], 0.0, {}, degenerate=True, note="<Q,Q> vanishes")], tol)
    L = num / den
    res = _norm(dt - L * q) / scale
    return ConditionReport(name, [PointResult([], res, {"L": L})], tol)


def nabla2_xy(d2: np.ndarray) -> np.ndarray:
    """``∇²_{XY} T = ∇_X ∇_Y T`` laid out as ``[..., X, Y]``."""
    return np.swapaxes(d2, -1, -2)


def check_order2_family(field: TensorField, pts=None, kind: str = "symmetric", tol: float | None = None) -> ConditionReport:
    """Symmetric-type or recurrent-type operator of order 2.

    symmetric: ``∇²_{XY} T + α ∇²_{YX} T = 0`` (leading coefficient fixed to 1).
    recurrent: ``∇²_{XY} T + β ∇²_{YX} T + Π¹(X) ∇_Y T + Π¹'(Y) ∇_X T + Π²(X,Y) T = 0``.
    """
    if kind not in ("symmetric", "recurrent"):
        raise ValueError("kind must be 'symmetric' or 'recurrent'")
    tol = _env_tol(TOL_DEPTH2) if tol is None else tol
    results = []
    for p in _points(field, pts):
        T, dT, d2 = field.values(p, 2)
        n = field.metric.dim
        xy = nabla2_xy(d2)
        yx = d2
        basis = [("alpha_swap" if kind == "symmetric" else "Pi0_swap", (), yx)]
        if kind == "recurrent":
            for a in range(n):
                e = _dirac(n, a)
                # Π¹(X) ∇_Y T -> out[..., X, Y] = e[X] dT[..., Y]
                basis.append(("Pi1", (a,), np.moveaxis(_otimes_last(e, dT), -1, -2)))
            for a in range(n):
                e = _dirac(n, a)
                basis.append(("Pi1_swap", (a,), _otimes_last(e, dT)))
            for a in range(n):
                for b in range(n):
                    basis.append(("Pi2", (a, b), np.multiply.outer(T, np.outer(_dirac(n, a), _dirac(n, b)))))
        cond = LinearCondition(
            xy, tuple(basis), scale=max(_norm(T), _norm(dT), _norm(d2)), subject_norm=_norm(T)
        )
        results.append(_solve(cond, p))
    return _report(f"{kind}-type-order-2", field, results, tol)
