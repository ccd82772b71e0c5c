"""Theorem-verification suite.

Each block checks one family of results (classification, flatness
identities, operator identities, ...) on random or catalog inputs and
returns a :class:`BlockResult`. ``run_suite`` runs the blocks in a fixed
order; the CLI ``verify-theorems`` command and the acceptance tests are thin
wrappers around it.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from . import catalog as cat
from . import tensor as tc
from .btensor import (
    CATALOG_NAMES,
    CLASS_EXAMPLES,
    BCoefficients,
    BTensorError,
    build_tensor,
    class_relations_check,
    classify,
    combine,
    flatness_identity_residual,
    generic,
    random_member,
)
from .engine import curvature_package
from .structure import TensorField, check_symmetric, fit_recurrence, nabla2_xy
from .tensor import Metric, Tensor

__all__ = ["SuiteConfig", "BlockResult", "BLOCKS", "run_block", "run_suite"]


@dataclass(frozen=True)
class SuiteConfig:
    """Sizes of the suite. ``budget`` scales every random-sample count."""

    classifier_dims: tuple[int, ...] = (3, 4, 5, 6)
    metric_dims: tuple[int, ...] = (3, 4)
    seeds: tuple[int, ...] = (0,)
    points: int = 8
    budget: float = 1.0
    enforce_time: bool = True

    @classmethod
    def from_cli(cls, dims=(3, 4), seeds=(0, 1, 2), points: int = 8) -> SuiteConfig:
        dims = tuple(sorted(set(dims)))
        light = tuple(d for d in dims if d <= 4) or (3,)
        return cls(dims, light, tuple(seeds), points, budget=points / 8, enforce_time=False)

    def count(self, base: int, floor: int = 1) -> int:
        return max(floor, int(round(base * self.budget)))


@dataclass
class BlockResult:
    key: int
    name: str
    passed: bool
    checks: int
    failures: list[str] = field(default_factory=list)
    worst: float = 0.0
    elapsed: float = 0.0
    budget_s: float | None = None
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f", worst residual {self.worst:.3g}" if self.worst else ""
        slow = ""
        if self.budget_s is not None and self.elapsed > self.budget_s:
            slow = f", over time budget {self.budget_s:g}s"
        msg = f"{status} [{self.key}] {self.name}: {self.checks} checks, {len(self.failures)} failures{extra}, {self.elapsed:.2f}s{slow}"
        if self.failures:
            msg += " | first: " + self.failures[0]
        return msg

    def to_json(self) -> dict:
        return {
            "key": self.key,
            "name": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "failures": self.failures[:50],
            "failure_count": len(self.failures),
            "worst": self.worst,
            "elapsed": self.elapsed,
            "budget_s": self.budget_s,
            "detail": self.detail,
        }


def _norm(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.abs(x).max()) if x.size else 0.0


def _random_metric(n: int, seed: int, i: int) -> cat.CatalogMetric:
    return cat.random_polynomial(n, seed=1000 * seed + i)


# ------------------------------------------------------------------ blocks

def block_classifier(cfg: SuiteConfig, seed: int):
    fails, checks = [], 0
    for n in cfg.classifier_dims:
        for cls, names in CLASS_EXAMPLES.items():
            for name in names:
                got = classify(generic(name, n)).value
                checks += 1
                if got != cls:
                    fails.append(f"{name} at n={n}: class {got}, listed as {cls}")
    return checks, fails, 0.0, {}


def block_relations(cfg: SuiteConfig, seed: int):
    fails, checks = [], 0
    per_dim = cfg.count(10_000, 40)
    for n in cfg.classifier_dims:
        rng = random.Random(7919 * seed + n)
        for i in range(per_dim):
            kind = i % 5
            if kind < 4:
                c = random_member(kind + 1, n, rng)
            else:
                c = BCoefficients(n, tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(11)))
                if not any(c.a):
                    continue
            verdict = class_relations_check(c)
            checks += 1
            if not verdict.agree:
                fails.append(f"n={n} a={[str(x) for x in c.a]}: {verdict.as_dict()}")
    return checks, fails, 0.0, {"per_dim": per_dim}


def block_flatness(cfg: SuiteConfig, seed: int):
    fails, checks, worst = [], 0, 0.0
    n_metrics = cfg.count(20, 2)
    n_sets = cfg.count(50, 3)
    rng = random.Random(104729 + seed)
    for i in range(n_metrics):
        n = cfg.metric_dims[i % len(cfg.metric_dims)]
        sets = [random_member(k, n, rng) for k in (1, 2, 3) for _ in range(n_sets)]
        cm = _random_metric(n, seed, i)
        for p in cm.sample_points(cfg.points):
            pkg = curvature_package(cm.field, p, 0)
            for c in sets:
                out = flatness_identity_residual(c, pkg)
                checks += 1
                worst = max(worst, out["residual"])
                if out["residual"] > 1e-9:
                    fails.append(f"{cm.name} class {out['class']}: residual {out['residual']:.3g}")
    return checks, fails, worst, {"metrics": n_metrics, "sets_per_class": n_sets}


def _rational_metric(n: int, rng: random.Random) -> Metric:
    while True:
        g = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                v = Fraction(rng.randint(-3, 3), rng.randint(1, 4))
                if i == j:
                    v += 2
                g[i][j] = g[j][i] = v
        try:
            return Metric.from_array(np.array(g, dtype=object))
        except tc.TensorError:
            continue


def block_tachibana(cfg: SuiteConfig, seed: int):
    fails, checks = [], 0
    n = 3
    rng = random.Random(1299709 + seed)
    m = _rational_metric(n, rng)
    G = tc.kulkarni_nomizu(m.g, m.g) * Fraction(1, 2)
    for i in range(cfg.count(1000, 30)):
        k = 2 + i % 3
        data = np.empty((n,) * k, dtype=object)
        for idx in np.ndindex(data.shape):
            data[idx] = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        T = Tensor(data)
        lhs = tc.q_operator(m.g, T)
        rhs = tc.curvature_dot(G, T, m)
        checks += 1
        if not tc.is_zero(lhs - rhs):
            fails.append(f"k={k} sample {i}: Q(g,T) differs from G.T")
    return checks, fails, 0.0, {"metric": [[str(x) for x in row] for row in m.g.data]}


def block_fixtures(cfg: SuiteConfig, seed: int):
    fails, checks, worst = [], 0, 0.0

    def expect(label: str, value: float, tol: float):
        nonlocal checks, worst
        checks += 1
        worst = max(worst, value)
        if not value <= tol:
            fails.append(f"{label}: {value:.3g} > {tol:g}")

    s3 = cat.sphere(3, 1.0)
    W = generic("W", 3)
    for p in s3.sample_points(cfg.points, seed):
        pkg = curvature_package(s3.field, p, 1)
        expect(f"sphere r-6 at {np.round(p, 3)}", abs(pkg.r - 6.0), 1e-9)
        expect("sphere |W|", _norm(build_tensor(W, pkg).data), 1e-9)
        expect("sphere |nabla R|", _norm(pkg.nabla_R.data), 1e-9)
    sch = cat.schwarzschild(1.0)
    C = generic("C", 4)
    for p in sch.sample_points(3, seed):
        pkg = curvature_package(sch.field, p, 0)
        expect(f"schwarzschild |S| at {np.round(p, 3)}", _norm(pkg.S.data), 1e-8)
        expect("schwarzschild |C-R|", _norm(build_tensor(C, pkg).data - pkg.R.data), 1e-8)
    for cm in (cat.flat_euclidean(3), cat.flat_euclidean(4), cat.minkowski(4)):
        for p in cm.sample_points(min(cfg.points, 3), seed):
            pkg = curvature_package(cm.field, p, 0)
            for name in CATALOG_NAMES:
                B = build_tensor(generic(name, cm.dim), pkg).data
                checks += 1
                if np.any(np.asarray(B, dtype=float) != 0.0):
                    fails.append(f"{cm.name}: {name} not exactly zero")
    return checks, fails, worst, {}


RECURRENT_ROWS = ("R", "W", "P", "M", "P*", "W0", "W1", "W3*")


def block_recurrency(cfg: SuiteConfig, seed: int):
    fails, checks, worst = [], 0, 0.0
    pp = cat.pp_wave("exp")
    pts = pp.sample_points(cfg.points, seed)
    forms = {}
    for name in RECURRENT_ROWS:
        rep = fit_recurrence(TensorField(pp.field, name), pts)
        checks += 1
        worst = max(worst, rep.max_residual)
        if rep.verdict != "holds":
            fails.append(f"{name}: recurrence {rep.verdict} (residual {rep.max_residual:.3g})")
            continue
        forms[name] = np.array([pt.unknowns["Pi"] for pt in rep.points])
    du = np.array([pp.expected.recurrent_form(p) for p in pts])
    for name, F in forms.items():
        checks += 1
        dev = float(np.abs(F - du).max())
        if dev > 1e-6:
            fails.append(f"{name}: Pi deviates from du by {dev:.3g}")
        for other, F2 in forms.items():
            if other < name:
                checks += 1
                if float(np.abs(F - F2).max()) > 1e-6:
                    fails.append(f"{name} vs {other}: recurrence forms differ")
    sym = check_symmetric(TensorField(pp.field, "R"), pts)
    checks += 1
    if sym.verdict != "fails":
        fails.append(f"check_symmetric on the recurrent pp-wave returned {sym.verdict}")
    return checks, fails, worst, {"Pi_point0": forms.get("R", np.zeros((1, 4)))[0].tolist()}


OPERATORS = ("R", "C", "K", "W")


def block_operator_identities(cfg: SuiteConfig, seed: int):
    fails, checks, worst = [], 0, 0.0
    tally: dict[str, list] = {}
    n_metrics = cfg.count(10, 2)
    for i in range(n_metrics):
        n = cfg.metric_dims[i % len(cfg.metric_dims)]
        cm = _random_metric(n, seed, 100 + i)
        B = {name: generic(name, n) for name in ("C", "K", "W", "M", "P*", "R")}
        for p in cm.sample_points(cfg.points):
            pkg = curvature_package(cm.field, p, 0)
            m = pkg.metric
            T = {name: build_tensor(c, pkg) for name, c in B.items()}
            G = Tensor(0.5 * np.asarray(tc.kulkarni_nomizu(pkg.g, pkg.g).data))
            scale = max(_norm(pkg.R.data) ** 2, 1e-300)
            for dname in OPERATORS:
                D = T[dname]
                act = {name: np.asarray(tc.curvature_dot(D, t, m).data) for name, t in T.items()}
                pairs = [("C", "K"), ("W", "R"), ("M", "R"), ("P*", "R")]
                for x, y in pairs:
                    key = f"{dname}.{x} = {dname}.{y}"
                    res = _norm(act[x] - act[y]) / scale
                    entry = tally.setdefault(key, [0, 0, 0.0])
                    entry[0] += 1
                    entry[2] = max(entry[2], res)
                    checks += 1
                    if res > 1e-9:
                        entry[1] += 1
                        fails.append(f"{key} on {cm.name}: relative residual {res:.3g}")
                key = f"{dname}.G = 0"
                res = _norm(tc.curvature_dot(D, G, m).data) / max(_norm(D.data), 1.0)
                entry = tally.setdefault(key, [0, 0, 0.0])
                entry[0] += 1
                entry[2] = max(entry[2], res)
                checks += 1
                if res > 1e-10:
                    entry[1] += 1
                    fails.append(f"{key} on {cm.name}: residual {res:.3g}")
    detail = {k: {"checks": v[0], "failures": v[1], "worst": v[2]} for k, v in tally.items()}
    worst = max(v[2] for v in tally.values())
    return checks, fails, worst, {"identities": detail}


def _boundary_pair(k: int, n: int, rng: random.Random):
    """(c1, c2, mu, eta) with c1, c2 of class k and mu c1 + eta c2 of class 1."""
    for _ in range(100):
        x = random_member(k, n, rng)
        w = random_member(1, n, rng)
        mu = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 4))
        eta = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 4))
        y = BCoefficients(n, tuple((wi - mu * xi) / eta for wi, xi in zip(w.a, x.a)))
        if classify(y).value == k:
            return x, y, mu, eta
    raise BTensorError("could not build a boundary pair")  # pragma: no cover


def block_combination(cfg: SuiteConfig, seed: int):
    fails, checks = [], 0
    rng = random.Random(15485863 + seed)
    total = cfg.count(10_000, 60)
    pairs = [(i, j) for i in range(1, 5) for j in range(i, 5)]
    dims = cfg.classifier_dims
    boundary, t = 0, -1
    while checks < total:
        t += 1
        n = dims[t % len(dims)]
        mode = t % 12
        if mode == 10:
            c1, c2, mu, eta = _boundary_pair(2, n, rng)
            boundary += 1
        elif mode == 11:
            c1, c2, mu, eta = _boundary_pair(3, n, rng)
            boundary += 1
        else:
            k1, k2 = pairs[mode % len(pairs)]
            c1, c2 = random_member(k1, n, rng), random_member(k2, n, rng)
            mu = Fraction(rng.randint(-5, 5), rng.randint(1, 5))
            eta = Fraction(rng.randint(-5, 5), rng.randint(1, 5))
        if not any(mu * x + eta * y for x, y in zip(c1.a, c2.a)):
            # zero combination; redraw
            continue
        res = combine(c1, c2, mu, eta)
        actual = classify(res.coefficients).value
        checks += 1
        if res.predicted != actual:
            fails.append(f"n={n} classes {classify(c1).value},{classify(c2).value}: predicted {res.predicted}, got {actual}")
    return checks, fails, 0.0, {"boundary_cases": boundary}


def block_ricci_identity(cfg: SuiteConfig, seed: int):
    fails, checks, worst = [], 0, 0.0
    for i in range(cfg.count(5, 1)):
        cm = _random_metric(3, seed, 200 + i)
        field = TensorField(cm.field, "R")
        for p in cm.sample_points(min(cfg.points, 4)):
            R, dR, d2 = field.values(p, 2)
            pkg = curvature_package(cm.field, p, 0)
            RR = np.asarray(tc.curvature_dot(pkg.R, pkg.R, pkg.metric).data)
            res = _norm(nabla2_xy(d2) - d2 - RR) / max(_norm(R) ** 2, 1e-300)
            checks += 1
            worst = max(worst, res)
            if res > 1e-7:
                fails.append(f"{cm.name} at {np.round(p, 3)}: residual {res:.3g}")
    return checks, fails, worst, {}


def block_implications(cfg: SuiteConfig, seed: int):
    fails, checks = [], 0
    tol = 1e-9
    names = list(cat.DEFAULT_NAMES)
    triggered = {"R=0": 0, "B=0": 0, "D.R=0": 0, "D.B=0": 0}
    for spec in names:
        cm = cat.get(spec)
        n = cm.dim
        if n < 3:
            continue
        rows = {name: generic(name, n) for name in CATALOG_NAMES}
        for p in cm.sample_points(min(cfg.points, 8), seed):
            pkg = curvature_package(cm.field, p, 0)
            m = pkg.metric
            Rn = _norm(pkg.R.data)
            s1 = max(1.0, Rn)
            s2 = s1 * s1
            T = {name: build_tensor(c, pkg) for name, c in rows.items()}
            zero = {name: _norm(t.data) <= tol * s1 for name, t in T.items()}
            r_zero = Rn <= tol
            for name in CATALOG_NAMES:
                checks += 1
                triggered["R=0"] += r_zero
                triggered["B=0"] += zero[name]
                if r_zero and not zero[name]:
                    fails.append(f"{spec}: R = 0 but {name} != 0")
                if zero[name] and not zero["C"]:
                    fails.append(f"{spec}: {name} = 0 but C != 0")
            for dname in OPERATORS:
                D = T[dname]
                act = {name: _norm(tc.curvature_dot(D, t, m).data) <= tol * s2 for name, t in T.items()}
                dr_zero = _norm(tc.curvature_dot(D, pkg.R, m).data) <= tol * s2
                for name in CATALOG_NAMES:
                    checks += 1
                    triggered["D.R=0"] += dr_zero
                    triggered["D.B=0"] += act[name]
                    if dr_zero and not act[name]:
                        fails.append(f"{spec}: {dname}.R = 0 but {dname}.{name} != 0")
                    if act[name] and not act["C"]:
                        fails.append(f"{spec}: {dname}.{name} = 0 but {dname}.C != 0")
    return checks, fails, 0.0, {"premise_counts": triggered, "metrics": names}


Block = Callable[[SuiteConfig, int], tuple]

# key, name, function, time budget in seconds (per seed)
BLOCKS: tuple[tuple[int, str, Block, float], ...] = (
    (1, "classifier-exactness", block_classifier, 1.0),
    (2, "relations-cross-check", block_relations, 30.0),
    (3, "flatness-identities", block_flatness, 120.0),
    (4, "tachibana-identity", block_tachibana, 60.0),
    (5, "fixture-ground-truths", block_fixtures, 30.0),
    (6, "recurrency-equivalence", block_recurrency, 60.0),
    (7, "operator-identities", block_operator_identities, 120.0),
    (8, "combination-theorem", block_combination, 120.0),
    (9, "ricci-identity", block_ricci_identity, 60.0),
    (10, "implication-chains", block_implications, 300.0),
)


def run_block(key: int | str, cfg: SuiteConfig | None = None) -> BlockResult:
    cfg = cfg or SuiteConfig()
    for k, name, fn, budget in BLOCKS:
        if key in (k, name):
            break
    else:
        raise KeyError(f"no theorem block {key!r}")
    total_checks, all_fails, worst, detail = 0, [], 0.0, {}
    start = time.perf_counter()
    for seed in cfg.seeds:
        checks, fails, w, d = fn(cfg, seed)
        total_checks += checks
        all_fails += fails
        worst = max(worst, w)
        detail[f"seed_{seed}"] = d
    elapsed = time.perf_counter() - start
    limit = budget * len(cfg.seeds)
    passed = not all_fails and (not cfg.enforce_time or elapsed <= limit)
    return BlockResult(k, name, passed, total_checks, all_fails, worst, elapsed, limit, detail)


def run_suite(cfg: SuiteConfig | None = None, only=None, on_result=None) -> list[BlockResult]:
    cfg = cfg or SuiteConfig()
    out = []
    for k, name, _, _ in BLOCKS:
        if only and k not in only and name not in only:
            continue
        res = run_block(k, cfg)
        if on_result is not None:
            on_result(res)
        out.append(res)
    return out
