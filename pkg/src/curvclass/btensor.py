"""Exact coefficient algebra of the extended T-curvature tensor B.

A B-tensor at dimension n is fixed by eleven rationals a_0..a_10::

    B_ijkl = a0 R_ijkl + a1 R_ikjl
             + a2 S_jk g_il + a3 S_ik g_jl + a4 S_ij g_kl
             + a5 S_il g_jk + a6 S_jl g_ik + a7 S_kl g_ij
             + r (a8 g_il g_jk + a9 g_ik g_jl + a10 g_ij g_kl)

Everything in this module except :func:`build_tensor` and
:func:`flatness_identity_residual` is exact rational arithmetic.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .tensor import Tensor, TensorError

__all__ = [
    "BTensorError",
    "BCoefficients",
    "ContractionProfile",
    "ClassId",
    "GctCanonicalForm",
    "RelationsVerdict",
    "CombineResult",
    "CATALOG_NAMES",
    "CLASS_EXAMPLES",
    "GENERIC_PARAMS",
    "PAIRS",
    "catalog",
    "generic",
    "canonical_name",
    "contraction_profile",
    "classify",
    "class_relations_check",
    "relations_class1",
    "relations_class2",
    "relations_class3",
    "is_gct",
    "is_proper_gct",
    "is_skew_endomorphism",
    "gct_canonical_form",
    "assemble",
    "build_tensor",
    "flatness_identity_residual",
    "combine",
    "condition_c1",
    "condition_c2",
    "condition_c2_literal",
    "random_member",
    "classification_report",
]


class BTensorError(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(str(x).strip()) if isinstance(x, str) else Fraction(x)


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class BCoefficients:
    """The eleven coefficients of B at dimension ``n``."""

    n: int
    a: tuple[Fraction, ...]
    name: str | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        a = tuple(_frac(x) for x in self.a)
        if len(a) != 11:
            raise BTensorError(f"need 11 coefficients a0..a10, got {len(a)}")
        if int(self.n) != self.n or self.n < 3:
            raise BTensorError(f"dimension must be an integer >= 3, got {self.n}")
        if all(x == 0 for x in a):
            raise BTensorError("all coefficients are zero: the zero tensor is not a B-tensor")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "notes", tuple(self.notes))

    def __getitem__(self, i: int) -> Fraction:
        return self.a[i]

    def scaled(self, s) -> BCoefficients:
        return BCoefficients(self.n, tuple(_frac(s) * x for x in self.a))

    def to_json(self) -> dict:
        out = {"n": self.n, "a": [_fmt(x) for x in self.a]}
        if self.name:
            out["name"] = self.name
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    @classmethod
    def from_json(cls, obj: Mapping | str) -> BCoefficients:
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(int(obj["n"]), tuple(obj["a"]), obj.get("name"), tuple(obj.get("notes", ())))

    def __str__(self) -> str:
        label = self.name or "B"
        return f"{label}(n={self.n}; " + ", ".join(f"a{i}={_fmt(x)}" for i, x in enumerate(self.a)) + ")"


# ---------------------------------------------------------------- catalog

_ALIASES = {
    "R": "R", "C": "C", "P": "P", "W": "W", "K": "K", "M": "M",
    "C*": "C*", "CSTAR": "C*", "C'": "C'", "CPRIME": "C'",
    "P*": "P*", "PSTAR": "P*", "W*": "W*", "WSTAR": "W*",
    "W~": "W~", "WTILDE": "W~", "W̃": "W~",
    "T": "T", "TAU": "T", "Τ": "T",
}
for _i in range(10):
    for _fmt_name in (f"W{_i}", f"W_{_i}"):
        _ALIASES[_fmt_name] = f"W{_i}"
        _ALIASES[_fmt_name + "*"] = f"W{_i}*"
        _ALIASES[_fmt_name + "STAR"] = f"W{_i}*"

CATALOG_NAMES: tuple[str, ...] = (
    "R", "C", "P", "W", "K", "C*", "C'", "P*", "W*", "W~", "M",
    *(f"W{i}" for i in range(10)), *(f"W{i}*" for i in range(10)), "T",
)

PARAMETERS: dict[str, tuple[str, ...]] = {
    "C*": ("a0", "a2"),
    "C'": ("a0", "a2", "a8"),
    "P*": ("a0", "a2"),
    "W*": ("a0", "b"),
    "W~": ("a0", "a2", "a5"),
    "T": ("a0", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9"),
}

# Parameter values used whenever a "generic" member of a parametrized row is
# needed. a0 != 0 everywhere (a0 = a1 = 0 loses the flatness equivalence).
GENERIC_PARAMS: dict[str, dict[str, Fraction]] = {
    "C*": {"a0": Fraction(1), "a2": Fraction(1, 3)},
    "C'": {"a0": Fraction(1), "a2": Fraction(-1, 2), "a8": Fraction(1, 5)},
    "P*": {"a0": Fraction(1), "a2": Fraction(1, 2)},
    "W*": {"a0": Fraction(1), "b": Fraction(1, 4)},
    "W~": {"a0": Fraction(1), "a2": Fraction(1, 3), "a5": Fraction(-1, 7)},
    "T": {
        "a0": Fraction(1), "a2": Fraction(1, 2), "a3": Fraction(-1, 3), "a4": Fraction(1, 5),
        "a5": Fraction(2, 7), "a6": Fraction(-1, 4), "a7": Fraction(1, 6), "a8": Fraction(-1, 9),
        "a9": Fraction(1, 8),
    },
}

# The example lists attached to each class.
CLASS_EXAMPLES: dict[int, tuple[str, ...]] = {
    1: ("C",),
    2: ("K",),
    3: ("W", "P", "M", "P*", "W0", "W1", "W3*"),
    4: ("R", "W0*", "W1*", "W2", "W2*", "W3", *(f"W{i}" for i in range(4, 10)), *(f"W{i}*" for i in range(4, 10))),
}

# Pure Weyl-type rows: (a2, a3, a4, a5, a6, a7) in units of 1/(n-1).
_WROWS = {
    "W0": (-1, 0, 0, 0, 1, 0),
    "W1": (-1, 1, 0, 0, 0, 0),
    "W2": (0, 0, 0, -1, 1, 0),
    "W3": (0, -1, 0, 1, 0, 0),
    "W4": (0, 0, 0, 0, -1, 1),
    "W5": (0, -1, 0, 0, 1, 0),
    "W6": (-1, 0, 0, 0, 0, 1),
    "W7": (-1, 0, 0, 1, 0, 0),
    "W8": (-1, 0, 1, 0, 0, 0),
    "W9": (0, 0, -1, 1, 0, 0),
}


def canonical_name(name: str) -> str:
    key = name.strip().upper().replace(" ", "")
    if key in _ALIASES:
        return _ALIASES[key]
    raise BTensorError(f"unknown B-tensor name {name!r}; known: {', '.join(CATALOG_NAMES)}")


def catalog(name: str, n: int, verbatim: bool = False, **params) -> BCoefficients:
    """Coefficients of a named curvature tensor at dimension ``n``.

    Parametrized rows (C*, C', P*, W*, W~, T) need their free parameters as
    keyword arguments (see ``PARAMETERS``). For W* the printed row carries
    the same sign on a8 and a9; by default the sign of a8 is flipped so the
    row is the concircular-type combination a0 W - (2b/n) r G. Pass
    ``verbatim=True`` for the printed row.
    """
    key = canonical_name(name)
    if int(n) != n or n < 3:
        raise BTensorError(f"dimension must be an integer >= 3, got {n}")
    n = int(n)
    F = Fraction
    a = [F(0)] * 11
    notes: list[str] = []
    need = PARAMETERS.get(key, ())
    missing = [p for p in need if p not in params]
    if missing:
        raise BTensorError(f"{key} needs parameters {', '.join(missing)}")
    extra = set(params) - set(need)
    if extra:
        raise BTensorError(f"{key} takes no parameters {', '.join(sorted(extra))}")
    p = {k: _frac(v) for k, v in params.items()}

    if key == "R":
        a[0] = F(1)
    elif key in ("C", "K"):
        t = F(1, n - 2)
        a[0], a[2], a[3], a[5], a[6] = F(1), -t, t, -t, t
        if key == "C":
            a[8], a[9] = F(1, (n - 1) * (n - 2)), -F(1, (n - 1) * (n - 2))
    elif key == "P":
        a[0], a[2], a[3] = F(1), -F(1, n - 1), F(1, n - 1)
    elif key == "W":
        a[0], a[8], a[9] = F(1), -F(1, n * (n - 1)), F(1, n * (n - 1))
    elif key == "M":
        t = F(1, 2 * (n - 1))
        a[0], a[2], a[3], a[5], a[6] = F(1), -t, t, -t, t
    elif key == "C*":
        a0, a2 = p["a0"], p["a2"]
        s = (a0 / (n - 1) + 2 * a2) / n
        a[0], a[2], a[3], a[5], a[6], a[8], a[9] = a0, a2, -a2, a2, -a2, -s, s
    elif key == "C'":
        a0, a2, a8 = p["a0"], p["a2"], p["a8"]
        a[0], a[2], a[3], a[5], a[6], a[8], a[9] = a0, a2, -a2, a2, -a2, a8, -a8
    elif key == "P*":
        a0, a2 = p["a0"], p["a2"]
        s = (a0 / (n - 1) + a2) / n
        a[0], a[2], a[3], a[8], a[9] = a0, a2, -a2, -s, s
    elif key == "W*":
        a0, b = p["a0"], p["b"]
        s = (a0 / (n - 1) + 2 * b) / n
        if verbatim:
            a[0], a[8], a[9] = a0, s, s
            notes.append("W* stored as printed (a8 = a9); this breaks the GCT relation a8 = -a9")
        else:
            a[0], a[8], a[9] = a0, -s, s
            notes.append("W* printed with a8 = a9; stored with a8 = -a9 (use verbatim=True for the printed row)")
    elif key == "W~":
        a0, a2, a5 = p["a0"], p["a2"], p["a5"]
        s = (a0 + (n - 1) * (a2 + a5)) / (n * (n - 1))
        a[0], a[2], a[3], a[5], a[6], a[8], a[9] = a0, a2, -a2, a5, -a5, -s, s
    elif key == "T":
        a[0] = p["a0"]
        for i in range(2, 10):
            a[i] = p[f"a{i}"]
    else:
        base, star = key.rstrip("*"), key.endswith("*")
        sign = -1 if star else 1
        a[0] = F(1)
        for slot, v in zip(range(2, 8), _WROWS[base]):
            a[slot] = F(sign * v, n - 1)
    return BCoefficients(n, tuple(a), key, tuple(notes))


def generic(name: str, n: int, verbatim: bool = False) -> BCoefficients:
    """Like :func:`catalog`, filling parametrized rows from ``GENERIC_PARAMS``."""
    key = canonical_name(name)
    return catalog(key, n, verbatim, **GENERIC_PARAMS.get(key, {}))


# --------------------------------------------------------- contraction profile

PAIRS: tuple[str, ...] = ("12", "13", "14", "23", "24", "34")
R_PAIRS: tuple[str, ...] = ("12", "13", "14")


@dataclass(frozen=True)
class ContractionProfile:
    """Traces ``^{ij}S = p_ij S + q_ij r g`` and ``^{ij}r = rcoef r``."""

    n: int
    p: tuple[Fraction, ...]
    q: tuple[Fraction, ...]
    rcoef: tuple[Fraction, ...]

    def as_dict(self) -> dict:
        return {
            "p": {k: _fmt(v) for k, v in zip(PAIRS, self.p)},
            "q": {k: _fmt(v) for k, v in zip(PAIRS, self.q)},
            "r": {k: _fmt(v) for k, v in zip(R_PAIRS, self.rcoef)},
        }


def _pq(a: Sequence[Fraction], n: int) -> tuple[list[Fraction], list[Fraction]]:
    a0, a1, a2, a3, a4, a5, a6, a7, a8, a9, a10 = a
    p = [
        -a1 + a2 + a3 + a5 + a6 + n * a7,
        -a0 + a2 + a4 + a5 + n * a6 + a7,
        a0 + a1 + n * a2 + a3 + a4 + a6 + a7,
        a0 + a1 + a3 + a4 + n * a5 + a6 + a7,
        -a0 + a2 + n * a3 + a4 + a5 + a7,
        -a1 + a2 + a3 + n * a4 + a5 + a6,
    ]
    q = [
        a4 + a8 + a9 + n * a10,
        a3 + a8 + n * a9 + a10,
        a5 + n * a8 + a9 + a10,
        a2 + n * a8 + a9 + a10,
        a6 + a8 + n * a9 + a10,
        a7 + a8 + a9 + n * a10,
    ]
    return p, q


def contraction_profile(c: BCoefficients) -> ContractionProfile:
    p, q = _pq(c.a, c.n)
    rcoef = tuple(p[i] + c.n * q[i] for i in range(3))
    return ContractionProfile(c.n, tuple(p), tuple(q), rcoef)


# ------------------------------------------------------------- classifier

@dataclass(frozen=True)
class ClassId:
    value: int
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return f"Class{self.value}"


def _class_from_profile(p: Sequence[Fraction], q: Sequence[Fraction], r: Sequence[Fraction]) -> int:
    if not any(p):
        return 1 if not any(q) else 2
    return 3 if not any(r) else 4


def classify(c: BCoefficients) -> ClassId:
    prof = contraction_profile(c)
    value = _class_from_profile(prof.p, prof.q, prof.rcoef)
    diag = {
        "zero_p": [k for k, v in zip(PAIRS, prof.p) if v == 0],
        "zero_q": [k for k, v in zip(PAIRS, prof.q) if v == 0],
        "zero_r": [k for k, v in zip(R_PAIRS, prof.rcoef) if v == 0],
    }
    if c.notes:
        diag["notes"] = list(c.notes)
    return ClassId(value, diag)


def relations_class1(c: BCoefficients) -> bool:
    """All ^{ij}S vanish: the class-1 dependency of the coefficients."""
    n = c.n
    a0, a1, a2, a3, a4, a5, a6, a7, a8, a9, a10 = c.a
    return (
        a0 == -a9 * (n - 2) * (n - 1)
        and a1 == a7 * (n - 2)
        and a2 == a5 == -a7 + (n - 1) * a9
        and a3 == a6 == -(n - 1) * a9
        and a4 == a7
        and a8 == -a9 + a7 / (n - 1)
        and a10 == -a7 / (n - 1)
    )


def relations_class2(c: BCoefficients) -> bool:
    """All ^{ij}p vanish."""
    n = c.n
    a0, a1, a2, a3, a4, a5, a6, a7 = c.a[:8]
    return a0 == a6 * (n - 2) and a1 == a7 * (n - 2) and a2 == a5 == -a6 - a7 and a3 == a6 and a4 == a7


def relations_class3(c: BCoefficients, verbatim: bool = False) -> bool:
    """All ^{ij}r vanish.

    The printed a10 relation carries an extra factor n in the numerator;
    ``verbatim=True`` checks it as printed (for diagnostics only).
    """
    n = c.n
    a0, a1, a2, a3, a4, a5, a6, a7, a8, a9, a10 = c.a
    a10_expected = (a1 - (n - 1) * (a4 + a7)) / (n * (n - 1))
    if verbatim:
        a10_expected *= n
    return (
        a0 == (n - 1) * (a3 + a6 + n * a9)
        and a8 == -(a1 + (n - 1) * (a2 + a3 + a5 + a6 + n * a9)) / (n * (n - 1))
        and a10 == a10_expected
    )


@dataclass(frozen=True)
class RelationsVerdict:
    class1: bool
    class2: bool
    class3: bool
    class3_verbatim: bool
    predicted: int
    classified: int

    @property
    def agree(self) -> bool:
        return self.predicted == self.classified

    def as_dict(self) -> dict:
        return {
            "class1_relations": self.class1,
            "class2_relations": self.class2,
            "class3_relations": self.class3,
            "class3_relations_as_printed": self.class3_verbatim,
            "predicted": self.predicted,
            "classified": self.classified,
            "agree": self.agree,
        }


def class_relations_check(c: BCoefficients) -> RelationsVerdict:
    """Classify through the explicit coefficient relations and compare."""
    r1, r2, r3 = relations_class1(c), relations_class2(c), relations_class3(c)
    if r1:
        predicted = 1
    elif r2:
        predicted = 2
    elif r3:
        predicted = 3
    else:
        predicted = 4
    return RelationsVerdict(r1, r2, r3, relations_class3(c, verbatim=True), predicted, classify(c).value)


# ------------------------------------------------------ GCT predicates

def is_gct(c: BCoefficients) -> bool:
    a = c.a
    return (
        a[1] == a[4] == a[7] == a[10] == 0
        and a[2] == -a[3] == a[5] == -a[6]
        and a[8] == -a[9]
    )


def is_skew_endomorphism(c: BCoefficients) -> bool:
    """B skew in its last two slots, so B(X,Y) acts as a skew endomorphism."""
    a = c.a
    return a[2] == -a[6] and a[3] == -a[5] and a[8] == -a[9] and a[1] == a[4] == a[7] == a[10] == 0


@dataclass(frozen=True)
class GctCanonicalForm:
    """B = b0 R + b1 g∧S + b2 r g∧g."""

    b0: Fraction
    b1: Fraction
    b2: Fraction

    def coefficients(self, n: int) -> BCoefficients:
        b0, b1, b2 = self.b0, self.b1, self.b2
        z = Fraction(0)
        return BCoefficients(n, (b0, z, b1, -b1, z, b1, -b1, z, 2 * b2, -2 * b2, z))

    def as_dict(self) -> dict:
        return {"b0": _fmt(self.b0), "b1": _fmt(self.b1), "b2": _fmt(self.b2)}


def gct_canonical_form(c: BCoefficients) -> GctCanonicalForm:
    if not is_gct(c):
        raise BTensorError("coefficients do not define a generalized curvature tensor")
    # (g∧g)_ijkl = 2(g_il g_jk - g_ik g_jl), hence the half on a8
    return GctCanonicalForm(c.a[0], c.a[5], c.a[8] / 2)


def is_proper_gct(c: BCoefficients) -> bool:
    if not is_gct(c):
        return False
    form = gct_canonical_form(c)
    return form.b1 == 0 and form.b2 == 0


# ----------------------------------------------------- numeric evaluation

def _coef_array(c: BCoefficients | Sequence, like) -> list:
    a = c.a if isinstance(c, BCoefficients) else tuple(c)
    if np.asarray(like).dtype == object:
        return [_frac(x) for x in a]
    return [float(x) for x in a]


def assemble(a, g, R, S, r) -> np.ndarray:
    """Componentwise B from raw arrays.

    ``R``, ``S`` and ``r`` may carry the same number of trailing derivative
    slots (``∇^k R``, ``∇^k S``, ``∇^k r``); since the coefficients are
    constants and ``∇g = 0`` the result is then ``∇^k B``. Works on float
    and Fraction object arrays alike.
    """
    R = np.asarray(R)
    S = np.asarray(S)
    r = np.asarray(r)
    g = np.asarray(g)
    a = _coef_array(a, R)
    terms = [
        a[0] * R,
        a[1] * np.einsum("ikjl...->ijkl...", R),
        a[2] * np.einsum("jk...,il->ijkl...", S, g),
        a[3] * np.einsum("ik...,jl->ijkl...", S, g),
        a[4] * np.einsum("ij...,kl->ijkl...", S, g),
        a[5] * np.einsum("il...,jk->ijkl...", S, g),
        a[6] * np.einsum("jl...,ik->ijkl...", S, g),
        a[7] * np.einsum("kl...,ij->ijkl...", S, g),
    ]
    gg = (
        a[8] * np.einsum("il,jk->ijkl", g, g)
        + a[9] * np.einsum("ik,jl->ijkl", g, g)
        + a[10] * np.einsum("ij,kl->ijkl", g, g)
    )
    terms.append(np.einsum("ijkl,...->ijkl...", gg, r))
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def build_tensor(c: BCoefficients, pkg, order: int = 0) -> Tensor:
    """B (``order=0``), ∇B (1) or ∇²B (2) from a curvature package."""
    if pkg.dim != c.n:
        raise TensorError(f"coefficients are for n={c.n}, metric has dimension {pkg.dim}")
    g = pkg.g.data
    R = pkg.derivative("R", order).data
    S = pkg.derivative("S", order).data
    r = pkg.derivative("r", order).data
    return Tensor(assemble(c, g, R, S, r), c.n)


def _gg(g: np.ndarray, pattern: str) -> np.ndarray:
    return np.einsum(pattern, g, g)


def flatness_identity_residual(c: BCoefficients, pkg) -> dict:
    """Residual of the class identity reducing B to its class representative.

    Class 1: ``B - (a0 C + a1 C_ikjl) = 0``.
    Class 2: ``B - (a0 K + a1 K_ikjl) = r (a8 g_il g_jk + a9 g_ik g_jl + a10 g_ij g_kl)``.
    Class 3: ``B - (a0 W + a1 W_ikjl) = Σ a_m (g·S)_m - (r/n) Σ (a_m + a_m') g g``.
    Class 4 has no such identity; the residual reported is 0.
    Residuals are max-norms relative to ``max(1, |B|, |R|, |r|)``.
    """
    cls = classify(c).value
    n = c.n
    g, R, S, r = pkg.g.data, pkg.R.data, pkg.S.data, pkg.r
    a = [float(x) for x in c.a]
    B = assemble(c, g, R, S, r)
    scale = max(1.0, float(np.abs(B).max()), float(np.abs(R).max()), abs(r))
    if cls == 4:
        return {"class": 4, "identity": None, "residual": 0.0, "scale": scale}
    rep = {1: "C", 2: "K", 3: "W"}[cls]
    T = assemble(catalog(rep, n), g, R, S, r)
    lhs = B - (a[0] * T + a[1] * np.einsum("ikjl->ijkl", T))
    il_jk, ik_jl, ij_kl = _gg(g, "il,jk->ijkl"), _gg(g, "ik,jl->ijkl"), _gg(g, "ij,kl->ijkl")
    if cls == 1:
        rhs = np.zeros_like(lhs)
    elif cls == 2:
        rhs = r * (a[8] * il_jk + a[9] * ik_jl + a[10] * ij_kl)
    else:
        gs = (
            a[2] * np.einsum("il,jk->ijkl", g, S)
            + a[3] * np.einsum("jl,ik->ijkl", g, S)
            + a[4] * np.einsum("kl,ij->ijkl", g, S)
            + a[5] * np.einsum("jk,il->ijkl", g, S)
            + a[6] * np.einsum("ik,jl->ijkl", g, S)
            + a[7] * np.einsum("ij,kl->ijkl", g, S)
        )
        rhs = gs - (r / n) * ((a[2] + a[5]) * il_jk + (a[3] + a[6]) * ik_jl + (a[4] + a[7]) * ij_kl)
    res = float(np.abs(lhs - rhs).max()) / scale
    return {"class": cls, "identity": rep, "residual": res, "scale": scale}


# ------------------------------------------------------- combinations

def _combined(c1: BCoefficients, c2: BCoefficients, mu: Fraction, eta: Fraction) -> tuple[Fraction, ...]:
    return tuple(mu * x + eta * y for x, y in zip(c1.a, c2.a))


def condition_c1(c1: BCoefficients, c2: BCoefficients, mu, eta) -> bool:
    """Condition under which a combination of two class-2 members drops to class 1."""
    mu, eta, n = _frac(mu), _frac(eta), c1.n
    a = _combined(c1, c2, mu, eta)
    return (
        (c1[8] + c1[9] + c1[10]) * mu + (c2[8] + c2[9] + c2[10]) * eta == 0
        and a[0] + (n - 1) * (n - 2) * a[9] == 0
        and a[2] == (n - 1) * (a[9] + a[10])
    )


def condition_c2_literal(c1: BCoefficients, c2: BCoefficients, mu, eta) -> bool:
    """The class-3 combination condition exactly as printed (diagnostic only)."""
    mu, eta, n = _frac(mu), _frac(eta), c1.n
    a = _combined(c1, c2, mu, eta)
    t = -(n - 1) * (n - 2) * a[9]
    return (
        (c1[8] + c1[9] + c1[10]) * mu + (c2[8] + c2[9] + c2[10]) * eta == 0
        and a[0] == a[2] == a[3] == a[5] == t
        and a[4] == (n - 1) * (a[8] + a[9])
    )


def condition_c2(c1: BCoefficients, c2: BCoefficients, mu, eta) -> bool:
    """Condition under which a combination of two class-3 members drops to class 1.

    For class-3 inputs every ^{ij}r vanishes, so the combination is class 1
    exactly when all its ^{ij}p vanish, i.e. when it satisfies the class-1
    coefficient relations.
    """
    mu, eta = _frac(mu), _frac(eta)
    a = _combined(c1, c2, mu, eta)
    if not any(a):
        return True
    return relations_class1(BCoefficients(c1.n, a))


@dataclass(frozen=True)
class CombineResult:
    coefficients: BCoefficients
    predicted: int
    rule: str
    literal_prediction: int | None

    def as_dict(self) -> dict:
        return {
            "coefficients": self.coefficients.to_json(),
            "predicted": self.predicted,
            "rule": self.rule,
            "literal_prediction": self.literal_prediction,
        }


def combine(c1: BCoefficients, c2: BCoefficients, mu, eta) -> CombineResult:
    """``mu*c1 + eta*c2`` with its class predicted from the classes of the parts.

    ``predicted`` follows the case analysis for linear combinations, with two
    repairs: the class-3 pair uses :func:`condition_c2`, and pairs involving
    class 4 (where traces of the two parts can cancel) fall back to the
    combined contraction profile, which is linear in (mu, eta).
    ``literal_prediction`` is the unrepaired case table (None where it
    makes no prediction).
    """
    if c1.n != c2.n:
        raise BTensorError("cannot combine coefficients of different dimensions")
    mu, eta = _frac(mu), _frac(eta)
    a = _combined(c1, c2, mu, eta)
    if not any(a):
        raise BTensorError("the combination is the zero tensor")
    out = BCoefficients(c1.n, a)
    if mu == 0 or eta == 0:
        survivor = c2 if mu == 0 else c1
        k = classify(survivor).value
        return CombineResult(out, k, "scalar multiple", k)

    k1, k2 = classify(c1).value, classify(c2).value
    if k1 > k2:
        c1, c2, mu, eta, k1, k2 = c2, c1, eta, mu, k2, k1
    pair = (k1, k2)
    if pair == (1, 1):
        return CombineResult(out, 1, "class 1 is closed", 1)
    if k1 == 1:
        return CombineResult(out, k2, "class 1 summand is absorbed", k2)
    if pair == (2, 2):
        k = 1 if condition_c1(c1, c2, mu, eta) else 2
        return CombineResult(out, k, "class 2 pair, condition c1", k)
    if pair == (3, 3):
        k = 1 if condition_c2(c1, c2, mu, eta) else 3
        lit = 1 if condition_c2_literal(c1, c2, mu, eta) else 3
        return CombineResult(out, k, "class 3 pair, all combined p vanish", lit)
    if pair == (2, 3):
        return CombineResult(out, 4, "class 2 with class 3", 4)

    # pairs with class 4: combine the profiles linearly
    P1, P2 = contraction_profile(c1), contraction_profile(c2)
    p = [mu * x + eta * y for x, y in zip(P1.p, P2.p)]
    q = [mu * x + eta * y for x, y in zip(P1.q, P2.q)]
    r = [mu * x + eta * y for x, y in zip(P1.rcoef, P2.rcoef)]
    k = _class_from_profile(p, q, r)
    if pair == (4, 4):
        return CombineResult(out, k, "class 4 pair, combined profile", None)
    rule = "class 4 absorbs" if k == 4 else "class 4 with cancelling traces, combined profile"
    return CombineResult(out, k, rule, 4)


# ------------------------------------------------------- random members

def _rand_frac(rng: random.Random, bound: int = 9) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def random_member(cls: int, n: int, rng: random.Random) -> BCoefficients:
    """A random B-tensor of the requested class (rational coefficients)."""
    F = Fraction
    for _ in range(1000):
        if cls == 1:
            a7, a9 = _rand_frac(rng), _rand_frac(rng)
            a = [
                -a9 * (n - 2) * (n - 1), a7 * (n - 2), -a7 + (n - 1) * a9, -(n - 1) * a9, a7,
                -a7 + (n - 1) * a9, -(n - 1) * a9, a7, -a9 + a7 / (n - 1), a9, -a7 / (n - 1),
            ]
        elif cls == 2:
            a6, a7, a8, a9, a10 = (_rand_frac(rng) for _ in range(5))
            a = [a6 * (n - 2), a7 * (n - 2), -a6 - a7, a6, a7, -a6 - a7, a6, a7, a8, a9, a10]
        elif cls == 3:
            a1, a2, a3, a4, a5, a6, a7, a9 = (_rand_frac(rng) for _ in range(8))
            a0 = (n - 1) * (a3 + a6 + n * a9)
            a8 = -(a1 + (n - 1) * (a2 + a3 + a5 + a6 + n * a9)) / (n * (n - 1))
            a10 = (a1 - (n - 1) * (a4 + a7)) / (n * (n - 1))
            a = [a0, a1, a2, a3, a4, a5, a6, a7, a8, a9, a10]
        elif cls == 4:
            a = [_rand_frac(rng) for _ in range(11)]
        else:
            raise BTensorError(f"no class {cls}")
        if not any(a):
            continue
        c = BCoefficients(n, tuple(F(x) for x in a))
        if classify(c).value == cls:
            return c
    raise BTensorError(f"could not sample a class-{cls} member")  # pragma: no cover


def classification_report(c: BCoefficients) -> dict:
    cid = classify(c)
    out = {
        "name": c.name,
        "n": c.n,
        "a": [_fmt(x) for x in c.a],
        "class": cid.value,
        "profile": contraction_profile(c).as_dict(),
        "relations": class_relations_check(c).as_dict(),
        "gct": is_gct(c),
        "proper_gct": is_proper_gct(c),
        "skew_endomorphism": is_skew_endomorphism(c),
        "canonical_form": gct_canonical_form(c).as_dict() if is_gct(c) else None,
        "diagnostics": cid.diagnostics,
    }
    return out
