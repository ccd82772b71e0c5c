"""Curvature of a metric field at a point, via Taylor jets.

Conventions (fixed here, relied upon everywhere else):

* ``R(X, Y)Z = ∇_X ∇_Y Z - ∇_Y ∇_X Z - ∇_[X,Y] Z`` and
  ``R_ijkl = g(R(∂_i, ∂_j)∂_k, ∂_l)``, so the unit sphere has
  ``R = ½ g∧g`` and positive scalar curvature.
* Ricci contracts the first and fourth slots: ``S_jk = g^il R_ijkl``.
* Covariant derivatives append the derivative direction as the last slot:
  ``(∇T)[i_1..i_k, x] = ∇_x T_{i_1..i_k}``; ``∇²T[.., x, y]`` is ``∇_y ∇_x T``
  in that slot order (x differentiated first).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .jets import InsufficientOrder, Jet, JetArray, algebra, jeinsum
from .tensor import Metric, Tensor, TensorError

__all__ = [
    "MetricField",
    "LocalJets",
    "CurvaturePackage",
    "SingularMetric",
    "InsufficientOrder",
    "local_jets",
    "christoffel",
    "curvature_package",
    "covariant_derivative",
    "bianchi2_residual",
]


class SingularMetric(ValueError):
    pass


Components = Callable[[Sequence], Sequence[Sequence]]


@dataclass(frozen=True, eq=False)
class MetricField:
    """Metric components as a function of coordinates.

    ``components(x)`` returns the full n×n matrix of ``g_ij(x)``; it is
    called with floats or with :class:`~curvclass.jets.Jet` coordinates, so
    it must use arithmetic and numpy ufuncs only. ``box`` is the coordinate
    box sample points are drawn from; ``admissible`` rejects singular points.
    """

    dim: int
    components: Components
    name: str = "metric"
    box: tuple[Sequence[float], Sequence[float]] | None = None
    admissible: Callable[[np.ndarray], bool] = field(default=lambda p: True)

    def jets(self, point, order: int) -> JetArray:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise TensorError(f"point has shape {point.shape}, expected ({self.dim},)")
        alg = algebra(self.dim, order)
        x = [Jet.variable(alg, k, point[k]) for k in range(self.dim)]
        g = JetArray.from_nested(alg, self.components(x))
        if g.shape != (self.dim, self.dim):
            raise TensorError("metric components must form an n x n matrix")
        if np.abs(g.c - np.swapaxes(g.c, 0, 1)).max() > 1e-12 * max(1.0, np.abs(g.c).max()):
            raise TensorError("metric components are not symmetric")
        return g

    def at(self, point) -> Metric:
        g = np.array(self.components([float(v) for v in point]), dtype=float)
        return Metric.from_array(g)

    def sample_points(self, count: int = 8, seed: int = 0) -> list[np.ndarray]:
        """Quasi-random admissible points (scrambled Halton in ``box``)."""
        lo, hi = self.box if self.box is not None else ([-0.5] * self.dim, [0.5] * self.dim)
        sampler = qmc.Halton(d=self.dim, scramble=True, seed=seed)
        out: list[np.ndarray] = []
        for _ in range(100):
            for u in sampler.random(count * 2):
                p = qmc.scale(u[None, :], lo, hi)[0]
                if self.admissible(p):
                    out.append(p)
                    if len(out) == count:
                        return out
        raise SingularMetric(f"could not find {count} admissible points for {self.name}")


class LocalJets:
    """Jets of g, g^-1, Christoffel symbols and Riemann tensor about a point."""

    def __init__(self, metric: MetricField, point, order: int):
        self.metric = metric
        self.point = np.asarray(point, dtype=float)
        if not metric.admissible(self.point):
            raise SingularMetric(f"{metric.name}: point {self.point} is not admissible")
        self.g = metric.jets(self.point, order)
        g0 = self.g.value()
        if abs(np.linalg.det(g0)) < 1e-14 * max(1.0, np.abs(g0).max()) ** metric.dim:
            raise SingularMetric(f"{metric.name}: metric is singular at {self.point}")
        self.ginv = self.g.inverse()
        self._gamma: JetArray | None = None
        self._riemann: JetArray | None = None

    @property
    def n(self) -> int:
        return self.metric.dim

    @property
    def gamma(self) -> JetArray:
        """Γ^a_bc as a jet array indexed [a, b, c]."""
        if self._gamma is None:
            dg = self.g.diff()  # dg[i, j, k] = ∂_k g_ij
            # lower[d, b, c] = ½(∂_b g_dc + ∂_c g_db - ∂_d g_bc)
            lower = 0.5 * (dg.transpose((0, 2, 1)) + dg - dg.transpose((2, 0, 1)))
            self._gamma = jeinsum(self.ginv, [0, 3], lower, [3, 1, 2], [0, 1, 2])
        return self._gamma

    @property
    def riemann(self) -> JetArray:
        """R_ijkl as a jet array."""
        if self._riemann is None:
            G = self.gamma
            dG = G.diff()  # dG[m, j, k, i] = ∂_i Γ^m_jk
            # up[m, k, i, j] = R^m_kij, with R(∂_i, ∂_j)∂_k = R^m_kij ∂_m
            up = dG.transpose((0, 2, 3, 1)) - dG.transpose((0, 2, 1, 3))
            gg = jeinsum(G, [0, 2, 4], G, [4, 3, 1], [0, 1, 2, 3])  # Γ^m_ip Γ^p_jk -> [m, k, i, j]
            up = up + gg - gg.transpose((0, 1, 3, 2))
            self._riemann = jeinsum(self.g, [3, 4], up, [4, 2, 0, 1], [0, 1, 2, 3])
        return self._riemann

    def ricci(self) -> JetArray:
        return jeinsum(self.ginv, [0, 3], self.riemann, [0, 1, 2, 3], [1, 2])

    def scalar(self) -> JetArray:
        return jeinsum(self.ginv, [0, 1], self.ricci(), [0, 1], [])

    def nabla(self, T: JetArray) -> JetArray:
        """Covariant derivative of a (0,k) jet tensor; adds a last slot."""
        k = len(T.shape)
        out = T.diff()
        G = self.gamma
        for m in range(k):
            t_sub = list(range(k))
            t_sub[m] = k + 1
            # Γ^a_{x i_m} T[.., a, ..]
            out = out - jeinsum(G, [k + 1, k, m], T, t_sub, list(range(k + 1)))
        return out


@lru_cache(maxsize=512)
def _cached_local(metric: MetricField, key: tuple, order: int) -> LocalJets:
    return LocalJets(metric, np.array(key), order)


def local_jets(metric: MetricField, point, order: int) -> LocalJets:
    return _cached_local(metric, tuple(float(v) for v in point), order)


def christoffel(metric: MetricField, point) -> Tensor:
    """Γ^a_bc at a point as a (1,2) tensor indexed [a, b, c]."""
    lj = local_jets(metric, point, 1)
    return Tensor(lj.gamma.value(), metric.dim, contravariant=1)


@dataclass(frozen=True, eq=False)
class CurvaturePackage:
    """Curvature data at one point. ``depth`` counts available ∇ orders."""

    point: np.ndarray
    metric: Metric
    R: Tensor
    S: Tensor
    r: float
    depth: int = 0
    nabla_R: Tensor | None = None
    nabla2_R: Tensor | None = None
    nabla_S: Tensor | None = None
    nabla2_S: Tensor | None = None
    nabla_r: Tensor | None = None
    nabla2_r: Tensor | None = None

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def g(self) -> Tensor:
        return self.metric.g

    @property
    def g_inv(self) -> Tensor:
        return self.metric.g_inv

    def derivative(self, name: str, order: int) -> Tensor:
        """``order``-th covariant derivative of 'R', 'S' or 'r'."""
        if order > self.depth:
            raise InsufficientOrder(f"package has depth {self.depth}, asked for order {order}")
        if order == 0:
            return {"R": self.R, "S": self.S, "r": Tensor(np.array(self.r), self.dim)}[name]
        return getattr(self, f"nabla{'' if order == 1 else '2'}_{name}")


def _contract_leading(T: np.ndarray, ginv: np.ndarray, i: int, j: int) -> np.ndarray:
    k = T.ndim
    sub = list(range(k))
    sub[i], sub[j] = k, k + 1
    return np.einsum(T, sub, ginv, [k, k + 1], [s for s in range(k) if s not in (i, j)])


def curvature_package(metric: MetricField, point, depth: int = 0) -> CurvaturePackage:
    """R, S, r and up to two covariant derivatives of R at ``point``."""
    if depth not in (0, 1, 2):
        raise ValueError("depth must be 0, 1 or 2")
    lj = local_jets(metric, point, depth + 2)
    n = metric.dim
    g0 = lj.g.value()
    ginv0 = lj.ginv.value()
    m = Metric(Tensor(g0), Tensor(ginv0))
    R = lj.riemann.value()
    S = _contract_leading(R, ginv0, 0, 3)
    r = float(np.einsum("jk,jk->", ginv0, S))
    extra = {}
    if depth >= 1:
        dR_jet = lj.nabla(lj.riemann)
        derivs = [dR_jet.value()]
        if depth == 2:
            derivs.append(lj.nabla(dR_jet).value())
        for order, dR in enumerate(derivs, start=1):
            # contraction commutes with ∇ because ∇g = 0
            dS = _contract_leading(dR, ginv0, 0, 3)
            dr = _contract_leading(dS, ginv0, 0, 1)
            suffix = "" if order == 1 else "2"
            extra[f"nabla{suffix}_R"] = Tensor(dR, n)
            extra[f"nabla{suffix}_S"] = Tensor(dS, n)
            extra[f"nabla{suffix}_r"] = Tensor(dr, n)
    return CurvaturePackage(
        point=np.asarray(point, dtype=float), metric=m, R=Tensor(R, n), S=Tensor(S, n), r=r, depth=depth, **extra
    )


_NAMED_FIELDS = {
    "g": lambda lj: lj.g,
    "R": lambda lj: lj.riemann,
    "S": lambda lj: lj.ricci(),
    "r": lambda lj: lj.scalar(),
}


def covariant_derivative(metric: MetricField, point, T_field, times: int = 1) -> Tensor:
    """∇^times of a tensor field given by name ('g', 'R', 'S', 'r') or as a
    callable ``LocalJets -> JetArray`` of a (0,k) tensor."""
    fn = _NAMED_FIELDS[T_field] if isinstance(T_field, str) else T_field
    base = {"g": 0, "r": 2, "S": 2, "R": 2}.get(T_field, 2) if isinstance(T_field, str) else 2
    lj = local_jets(metric, point, base + times)
    T = fn(lj)
    for _ in range(times):
        T = lj.nabla(T)
    return Tensor(T.value(), metric.dim)


def bianchi2_residual(pkg: CurvaturePackage) -> float:
    """Max-norm of ∇_m R_ijkl + ∇_i R_jmkl + ∇_j R_mikl."""
    if pkg.depth < 1:
        raise InsufficientOrder("second Bianchi identity needs depth >= 1")
    d = np.asarray(pkg.nabla_R.data)
    cyc = d + np.einsum("jmkli->ijklm", d) + np.einsum("miklj->ijklm", d)
    return float(np.abs(cyc).max())
