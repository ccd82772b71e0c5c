"""Built-in metrics with known curvature, used as fixtures.

Metrics are addressed by ``name:arg:arg``, e.g. ``sphere:3:1``,
``pp-wave:exp``, ``random-polynomial:3:42``. JSON specs of the form
``{"name", "dim", "kind": "builtin"|"polynomial", "params"}`` are read by
:func:`from_spec`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Callable

import numpy as np

from .btensor import CATALOG_NAMES, build_tensor, catalog
from .engine import MetricField, bianchi2_residual, covariant_derivative, curvature_package
from .tensor import kulkarni_nomizu

__all__ = [
    "Expected",
    "CatalogMetric",
    "get",
    "names",
    "from_spec",
    "load_spec",
    "self_test",
    "flat_euclidean",
    "minkowski",
    "sphere",
    "hyperbolic",
    "schwarzschild",
    "flrw",
    "pp_wave",
    "random_polynomial",
    "polynomial_metric",
]


@dataclass(frozen=True)
class Expected:
    """Properties a fixture is known to have. ``None`` means "not claimed"."""

    flat: bool | None = None
    ricci_flat: bool | None = None
    # sectional curvature when the space has constant curvature
    constant_curvature: float | None = None
    conformally_flat: bool | None = None
    locally_symmetric: bool | None = None
    # recurrence form as a function of the point
    recurrent_form: Callable[[np.ndarray], np.ndarray] | None = None

    def claims(self) -> dict:
        out = {}
        for key in ("flat", "ricci_flat", "constant_curvature", "conformally_flat", "locally_symmetric"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.recurrent_form is not None:
            out["recurrent"] = True
        return out


@dataclass(frozen=True, eq=False)
class CatalogMetric:
    name: str
    field: MetricField
    expected: Expected = Expected()
    description: str = ""

    @property
    def dim(self) -> int:
        return self.field.dim

    def sample_points(self, count: int = 8, seed: int = 0) -> list[np.ndarray]:
        return self.field.sample_points(count, seed)

    def to_json(self) -> dict:
        return {"name": self.name, "dim": self.dim, "description": self.description, "expected": self.expected.claims()}


# ---------------------------------------------------------------- fixtures

def _diag(entries) -> list[list]:
    n = len(entries)
    return [[entries[i] if i == j else 0.0 for j in range(n)] for i in range(n)]


def flat_euclidean(n: int = 4) -> CatalogMetric:
    mf = MetricField(n, lambda x: _diag([1.0] * n), f"flat-euclidean:{n}", ([-1.0] * n, [1.0] * n))
    exp = Expected(flat=True, ricci_flat=True, constant_curvature=0.0, conformally_flat=True, locally_symmetric=True)
    return CatalogMetric(mf.name, mf, exp, "Euclidean space in Cartesian coordinates")


def minkowski(n: int = 4) -> CatalogMetric:
    sig = [-1.0] + [1.0] * (n - 1)
    mf = MetricField(n, lambda x: _diag(sig), f"minkowski:{n}", ([-1.0] * n, [1.0] * n))
    exp = Expected(flat=True, ricci_flat=True, constant_curvature=0.0, conformally_flat=True, locally_symmetric=True)
    return CatalogMetric(mf.name, mf, exp, "Minkowski space, signature (-,+,...,+)")


def sphere(n: int = 3, radius: float = 1.0) -> CatalogMetric:
    """Round sphere in hyperspherical angles (θ_1, ..., θ_{n-1}, φ)."""
    a2 = float(radius) ** 2

    def comps(x):
        entries = []
        w = a2
        for k in range(n):
            entries.append(w)
            if k < n - 1:
                w = w * np.sin(x[k]) ** 2
        return _diag(entries)

    eps = 0.35
    lo = [eps] * (n - 1) + [0.0]
    hi = [math.pi - eps] * (n - 1) + [2 * math.pi]
    mf = MetricField(n, comps, f"sphere:{n}:{radius:g}", (lo, hi), lambda p: all(abs(math.sin(t)) > 1e-3 for t in p[:-1]))
    exp = Expected(
        flat=False, ricci_flat=False, constant_curvature=1.0 / a2, conformally_flat=True, locally_symmetric=True
    )
    return CatalogMetric(mf.name, mf, exp, f"round {n}-sphere of radius {radius:g}")


def hyperbolic(n: int = 3, radius: float = 1.0) -> CatalogMetric:
    """Upper half-space model, last coordinate positive."""
    a2 = float(radius) ** 2

    def comps(x):
        w = a2 / x[n - 1] ** 2
        return _diag([w] * n)

    lo = [-1.0] * (n - 1) + [0.5]
    hi = [1.0] * (n - 1) + [2.0]
    mf = MetricField(n, comps, f"hyperbolic:{n}:{radius:g}", (lo, hi), lambda p: p[-1] > 1e-3)
    exp = Expected(
        flat=False, ricci_flat=False, constant_curvature=-1.0 / a2, conformally_flat=True, locally_symmetric=True
    )
    return CatalogMetric(mf.name, mf, exp, f"hyperbolic {n}-space of radius {radius:g}")


def schwarzschild(mass: float = 1.0) -> CatalogMetric:
    """Exterior Schwarzschild in (t, r, θ, φ)."""
    m = float(mass)

    def comps(x):
        t, r, th, ph = x
        h = 1 - 2 * m / r
        return _diag([-h, 1 / h, r * r, r * r * np.sin(th) ** 2])

    lo = [0.0, 3.0 * m, 0.4, 0.0]
    hi = [1.0, 10.0 * m, math.pi - 0.4, 2 * math.pi]
    mf = MetricField(4, comps, f"schwarzschild:{mass:g}", (lo, hi), lambda p: p[1] > 2 * m + 1e-6 and abs(math.sin(p[2])) > 1e-3)
    exp = Expected(flat=False, ricci_flat=True, conformally_flat=False, locally_symmetric=False)
    return CatalogMetric(mf.name, mf, exp, f"Schwarzschild exterior, mass {mass:g}")


def flrw(coeffs=(1.0, 0.5, 0.25)) -> CatalogMetric:
    """Spatially flat FLRW, ``-dt² + a(t)² (dx² + dy² + dz²)`` with polynomial a(t)."""
    cs = [float(c) for c in coeffs]

    def scale(t):
        out = 0.0 * t + cs[-1]
        for c in reversed(cs[:-1]):
            out = out * t + c
        return out

    def comps(x):
        a = scale(x[0])
        return _diag([-1.0, a * a, a * a, a * a])

    def admissible(p):
        return abs(scale(float(p[0]))) > 1e-3

    name = "flrw:" + ",".join(f"{c:g}" for c in cs)
    mf = MetricField(4, comps, name, ([0.2, -1.0, -1.0, -1.0], [1.2, 1.0, 1.0, 1.0]), admissible)
    static = all(c == 0 for c in cs[1:])
    exp = Expected(flat=static or None, conformally_flat=True)
    return CatalogMetric(mf.name, mf, exp, "spatially flat FLRW with polynomial scale factor")


_PP_PROFILES = {
    "exp": (lambda u: np.exp(u), lambda u: 1.0),
    "const": (lambda u: 1.0 + 0.0 * u, lambda u: 0.0),
}


def pp_wave(profile: str = "exp") -> CatalogMetric:
    """Plane wave ``2 du dv + f(u)(x² - y²) du² + dx² + dy²`` in (u, v, x, y).

    ``profile`` is ``exp`` (f = e^u, recurrent with Π = du) or ``const``
    (f = 1, locally symmetric).
    """
    if profile not in _PP_PROFILES:
        raise KeyError(f"unknown pp-wave profile {profile!r}; use one of {sorted(_PP_PROFILES)}")
    f, log_deriv = _PP_PROFILES[profile]

    def comps(x):
        u, v, X, Y = x
        guu = f(u) * (X * X - Y * Y)
        return [[guu, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]

    mf = MetricField(4, comps, f"pp-wave:{profile}", ([-0.5] * 4, [0.5] * 4))
    if profile == "exp":
        form = lambda p: np.array([log_deriv(p[0]), 0.0, 0.0, 0.0])
        exp = Expected(flat=False, ricci_flat=True, locally_symmetric=False, recurrent_form=form)
    else:
        exp = Expected(flat=False, ricci_flat=True, locally_symmetric=True)
    return CatalogMetric(mf.name, mf, exp, f"plane wave with profile {profile}")


def _monomials(n: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(n), d):
            e = [0] * n
            for v in combo:
                e[v] += 1
            out.append(tuple(e))
    return out


def _eval_poly(terms, x, powers):
    total = 0.0
    for coef, expo in terms:
        term = coef
        for k, e in enumerate(expo):
            if e:
                term = term * powers[k][e]
        total = total + term
    return total


def polynomial_metric(dim: int, components, name: str = "polynomial", box=None) -> MetricField:
    """Metric whose entries are polynomials: ``components[i][j]`` is a list
    of ``(coef, exponents)`` terms."""
    comps = [[[(float(c), tuple(int(v) for v in e)) for c, e in components[i][j]] for j in range(dim)] for i in range(dim)]
    for i in range(dim):
        for j in range(dim):
            for _, e in comps[i][j]:
                if len(e) != dim:
                    raise ValueError(f"exponent vector {e} in g[{i}][{j}] has wrong length")
            if sorted(comps[i][j]) != sorted(comps[j][i]):
                raise ValueError(f"polynomial metric is not symmetric at ({i}, {j})")
    top = max((max(e, default=0) for row in comps for terms in row for _, e in terms), default=0)

    def fn(x):
        powers = []
        for k in range(dim):
            pw = [1.0, x[k]]
            for _ in range(2, top + 1):
                pw.append(pw[-1] * x[k])
            powers.append(pw)
        return [[_eval_poly(comps[i][j], x, powers) for j in range(dim)] for i in range(dim)]

    if box is None:
        box = ([-0.5] * dim, [0.5] * dim)
    return MetricField(dim, fn, name, box)


def random_polynomial(n: int = 3, seed: int = 0, degree: int = 2, amplitude: float = 0.1) -> CatalogMetric:
    """Identity plus a symmetric random polynomial perturbation.

    Each entry of the perturbation is bounded by ``amplitude`` on the cube
    [-0.5, 0.5]^n, so the metric stays positive definite for n ≤ 9.
    """
    rng = np.random.default_rng(seed)
    monos = _monomials(n, degree)
    comps = [[[] for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            c = rng.uniform(-1.0, 1.0, len(monos))
            bound = sum(abs(ck) * 0.5 ** sum(e) for ck, e in zip(c, monos))
            c = c * (amplitude / bound)
            terms = [(float(ck), e) for ck, e in zip(c, monos)]
            if i == j:
                terms.append((1.0, (0,) * n))
            comps[i][j] = terms
            comps[j][i] = terms
    mf = polynomial_metric(n, comps, f"random-polynomial:{n}:{seed}")
    return CatalogMetric(mf.name, mf, Expected(), f"random polynomial metric, n={n}, seed={seed}, degree={degree}")


# ---------------------------------------------------------------- registry

def _num(s: str) -> float:
    return float(s)


_FACTORIES: dict[str, tuple[Callable[..., CatalogMetric], tuple[Callable, ...]]] = {
    "flat-euclidean": (flat_euclidean, (int,)),
    "minkowski": (minkowski, (int,)),
    "sphere": (sphere, (int, _num)),
    "hyperbolic": (hyperbolic, (int, _num)),
    "schwarzschild": (schwarzschild, (_num,)),
    "flrw": (flrw, (lambda s: tuple(float(v) for v in s.split(",")),)),
    "pp-wave": (pp_wave, (str,)),
    "random-polynomial": (random_polynomial, (int, int, int, _num)),
}

DEFAULT_NAMES = (
    "flat-euclidean:4",
    "minkowski:4",
    "sphere:3:1",
    "hyperbolic:3:1",
    "schwarzschild:1",
    "flrw:1,0.5,0.25",
    "pp-wave:exp",
    "pp-wave:const",
    "random-polynomial:3:0",
    "random-polynomial:4:1",
)


def names() -> list[str]:
    """Names of the metric families (append ``:args`` to instantiate)."""
    return list(_FACTORIES)


def get(spec: str) -> CatalogMetric:
    """Instantiate a catalog metric from ``name[:arg[:arg...]]``."""
    name, *args = spec.split(":")
    if name not in _FACTORIES:
        raise KeyError(f"unknown metric {name!r}; known: {', '.join(_FACTORIES)}")
    factory, parsers = _FACTORIES[name]
    if len(args) > len(parsers):
        raise ValueError(f"{name} takes at most {len(parsers)} arguments")
    try:
        parsed = [p(a) for p, a in zip(parsers, args)]
    except ValueError as exc:
        raise ValueError(f"bad argument in metric spec {spec!r}: {exc}") from None
    return factory(*parsed)


def from_spec(obj: dict) -> CatalogMetric:
    """Build a metric from a JSON spec.

    builtin:    ``{"kind": "builtin", "name": "sphere", "params": {"n": 3, "radius": 2}}``
    polynomial: ``{"kind": "polynomial", "dim": 2, "params": {"components":
                [[[[1, [0, 0]]], []], [[], [[1, [0, 0]], [1, [2, 0]]]]]}}``
    """
    kind = obj.get("kind", "builtin")
    params = dict(obj.get("params", {}))
    if kind == "builtin":
        name = obj["name"]
        if name not in _FACTORIES:
            raise KeyError(f"unknown metric {name!r}")
        cm = _FACTORIES[name][0](**params)
        if "dim" in obj and obj["dim"] != cm.dim:
            raise ValueError(f"spec dim {obj['dim']} does not match metric dim {cm.dim}")
        return cm
    if kind == "polynomial":
        dim = int(obj["dim"])
        box = params.get("box")
        mf = polynomial_metric(dim, params["components"], obj.get("name", "polynomial"), tuple(box) if box else None)
        return CatalogMetric(mf.name, mf, Expected(), "polynomial metric from spec")
    raise ValueError(f"unknown metric spec kind {kind!r}")


def load_spec(path: str) -> CatalogMetric:
    with open(path) as fh:
        return from_spec(json.load(fh))


# ---------------------------------------------------------------- self-test

def _rel(x: np.ndarray, ref: float) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.abs(x).max()) / max(1.0, ref) if x.size else 0.0


def self_test(cm: CatalogMetric, count: int = 8, tol: float = 1e-8) -> dict:
    """Verify every expected property at ``count`` sample points.

    Returns ``{property: max residual}`` plus ``"ok"``; structural checks
    (∇g = 0, second Bianchi identity) are always included.
    """
    e = cm.expected
    n = cm.dim
    res: dict[str, float] = {"nabla_g": 0.0, "bianchi2": 0.0}
    for key in e.claims():
        res[key] = 0.0
    weyl = catalog("C", n) if n >= 3 else None
    for p in cm.sample_points(count):
        depth = 1 if (e.locally_symmetric is not None or e.recurrent_form is not None) else 0
        pkg = curvature_package(cm.field, p, max(depth, 1))
        R = np.asarray(pkg.R.data)
        scale = float(np.abs(R).max())
        res["nabla_g"] = max(res["nabla_g"], _rel(covariant_derivative(cm.field, p, "g").data, 1.0))
        res["bianchi2"] = max(res["bianchi2"], bianchi2_residual(pkg) / max(1.0, float(np.abs(pkg.nabla_R.data).max())))
        if e.flat is not None:
            val = _rel(R, 1.0)
            res["flat"] = max(res["flat"], val if e.flat else float(val <= tol))
        if e.ricci_flat is not None:
            val = _rel(pkg.S.data, scale)
            res["ricci_flat"] = max(res["ricci_flat"], val if e.ricci_flat else float(val <= tol))
        if e.constant_curvature is not None:
            G = 0.5 * np.asarray(kulkarni_nomizu(pkg.g, pkg.g).data)
            res["constant_curvature"] = max(res["constant_curvature"], _rel(R - e.constant_curvature * G, scale))
        if e.conformally_flat is not None and weyl is not None:
            val = _rel(build_tensor(weyl, pkg).data, scale)
            if n == 3 and not e.conformally_flat:
                val = 0.0
            res["conformally_flat"] = max(res["conformally_flat"], val if e.conformally_flat else float(val <= tol))
        if e.locally_symmetric is not None:
            val = _rel(pkg.nabla_R.data, scale)
            res["locally_symmetric"] = max(res["locally_symmetric"], val if e.locally_symmetric else float(val <= tol))
        if e.recurrent_form is not None:
            Pi = e.recurrent_form(p)
            dR = np.asarray(pkg.nabla_R.data)
            res["recurrent"] = max(res["recurrent"], _rel(dR - np.multiply.outer(R, Pi), scale))
    res["ok"] = all(v <= tol for k, v in res.items())
    return res


def all_tensor_names() -> tuple[str, ...]:
    return tuple(CATALOG_NAMES)
