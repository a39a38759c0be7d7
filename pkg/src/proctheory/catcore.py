"""Finite symmetric monoidal dagger categories with discarding, and a seeded
law-checking harness.

A category is an object implementing :class:`Category`; morphisms are
immutable values understood by that category.  Every concrete category here
is strict monoidal, so associators and unitors are identities and the
coherence laws reduce to equalities of composites.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np


class TypeMismatch(ValueError):
    """Composite or tensor of morphisms whose types do not line up."""


class UnsupportedLaw(ValueError):
    pass


class Category:
    """Interface for the concrete categories.

    Subclasses override what they support; ``laws`` lists the law families
    the harness may check.
    """

    name = "abstract"
    laws: tuple[str, ...] = ()
    exact = True
    tol = 1e-9

    # objects
    def unit(self) -> Any:
        raise NotImplementedError

    def tensor_obj(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def sample_object(self, rng: np.random.Generator, max_dim: int) -> Any:
        raise NotImplementedError

    # morphisms
    def src(self, f) -> Any:
        raise NotImplementedError

    def tgt(self, f) -> Any:
        raise NotImplementedError

    def identity(self, a) -> Any:
        raise NotImplementedError

    def compose(self, g, f) -> Any:
        raise NotImplementedError

    def tensor(self, f, g) -> Any:
        raise NotImplementedError

    def swap(self, a, b) -> Any:
        raise NotImplementedError

    def dagger(self, f) -> Any:
        raise NotImplementedError

    def discard(self, a) -> Any:
        raise NotImplementedError

    def zero(self, a, b) -> Any:
        raise NotImplementedError

    def cup(self, a) -> Any:
        raise NotImplementedError

    def cap(self, a) -> Any:
        return self.dagger(self.cup(a))

    def sample_morphism(self, rng: np.random.Generator, a, b) -> Any:
        raise NotImplementedError

    def equal(self, f, g, tol: float | None = None) -> bool:
        raise NotImplementedError

    def deviation(self, f, g) -> float:
        return 0.0 if self.equal(f, g) else 1.0

    def to_json(self, f) -> Any:
        return repr(f)


# ---------------------------------------------------------------------------
# generic operations
# ---------------------------------------------------------------------------


def compose(cat: Category, g, f):
    """``g ∘ f``."""
    if cat.tgt(f) != cat.src(g):
        raise TypeMismatch(f"cannot compose: target {cat.tgt(f)} != source {cat.src(g)}")
    return cat.compose(g, f)


def compose_all(cat: Category, *fs):
    """``fs[0] ∘ fs[1] ∘ ... ∘ fs[-1]``."""
    out = fs[-1]
    for g in reversed(fs[:-1]):
        out = compose(cat, g, out)
    return out


def tensor(cat: Category, f, g):
    return cat.tensor(f, g)


def discard(cat: Category, a):
    return cat.discard(a)


def is_causal(cat: Category, f, tol: float | None = None) -> bool:
    """Whether discarding the output of ``f`` equals discarding its input."""
    lhs = cat.compose(cat.discard(cat.tgt(f)), f)
    return cat.equal(lhs, cat.discard(cat.src(f)), tol)


# ---------------------------------------------------------------------------
# law reports
# ---------------------------------------------------------------------------


@dataclass
class LawFailure:
    law: str
    inputs: Any
    lhs: Any
    rhs: Any
    deviation: float

    def to_json(self) -> dict:
        return {
            "law": self.law,
            "inputs": self.inputs,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "deviation": self.deviation,
        }


@dataclass
class LawReport:
    check: str
    samples: int = 0
    failures: list[LawFailure] = field(default_factory=list)
    elapsed_ms: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def merge(self, other: "LawReport") -> None:
        self.samples += other.samples
        self.failures.extend(other.failures)
        self.notes.extend(other.notes)

    def summary(self) -> str:
        status = "PASS" if self.passed else f"FAIL ({len(self.failures)} failures)"
        return f"{self.check}: {status} over {self.samples} samples in {self.elapsed_ms:.0f} ms"

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "samples": self.samples,
            "passed": self.passed,
            "failures": [f.to_json() for f in self.failures],
            "elapsed_ms": round(self.elapsed_ms, 3),
            "notes": list(self.notes),
        }


class Recorder:
    """Accumulates equation checks into a :class:`LawReport`."""

    def __init__(self, cat: Category, report: LawReport, tol: float | None = None, max_failures: int = 5):
        self.cat = cat
        self.report = report
        self.tol = tol
        self.max_failures = max_failures

    def eq(self, law: str, lhs, rhs, inputs: Sequence = ()) -> bool:
        cat = self.cat
        try:
            ok = cat.equal(lhs, rhs, self.tol)
        except (TypeMismatch, ValueError):
            ok = False
        if not ok and len(self.report.failures) < self.max_failures:
            try:
                dev = cat.deviation(lhs, rhs)
            except (TypeMismatch, ValueError):
                dev = float("inf")
            self.report.failures.append(
                LawFailure(law, [cat.to_json(x) for x in inputs], cat.to_json(lhs), cat.to_json(rhs), dev)
            )
        elif not ok:
            self.report.failures.append(LawFailure(law, None, None, None, float("nan")))
        return ok

    def truth(self, law: str, ok: bool, witness: Any = None) -> bool:
        if not ok:
            self.report.failures.append(LawFailure(law, witness, None, None, float("nan")))
        return ok


# ---------------------------------------------------------------------------
# law families
# ---------------------------------------------------------------------------

LAW_FAMILIES = (
    "category",
    "interchange",
    "monoidal",
    "symmetry",
    "dagger",
    "dagger_monoidal",
    "snake",
    "discard",
    "zero",
    "scalars",
)


def _objs(cat, rng, k, max_dim, groups=()):
    """Sample k objects.  Categories with an ``object_cap`` (integer objects)
    redraw until every tensor group listed in ``groups`` stays within it."""
    cap = getattr(cat, "object_cap", None)
    while True:
        objs = [cat.sample_object(rng, max_dim) for _ in range(k)]
        if cap is None or all(int(np.prod([objs[i] for i in g])) <= cap for g in groups):
            return objs
        max_dim = max(1, max_dim - 1) if rng.random() < 0.1 else max_dim


def _law_category(cat, rec, rng, max_dim):
    a, b, c, d = _objs(cat, rng, 4, max_dim)
    f, g, h = cat.sample_morphism(rng, a, b), cat.sample_morphism(rng, b, c), cat.sample_morphism(rng, c, d)
    rec.eq("assoc", compose(cat, h, compose(cat, g, f)), compose(cat, compose(cat, h, g), f), [f, g, h])
    rec.eq("left_unit", compose(cat, cat.identity(b), f), f, [f])
    rec.eq("right_unit", compose(cat, f, cat.identity(a)), f, [f])


def _law_interchange(cat, rec, rng, max_dim):
    a1, b1, c1, a2, b2, c2 = _objs(cat, rng, 6, max_dim, ((0, 3), (1, 4), (2, 5)))
    f1, g1 = cat.sample_morphism(rng, a1, b1), cat.sample_morphism(rng, b1, c1)
    f2, g2 = cat.sample_morphism(rng, a2, b2), cat.sample_morphism(rng, b2, c2)
    lhs = compose(cat, cat.tensor(g1, g2), cat.tensor(f1, f2))
    rhs = cat.tensor(compose(cat, g1, f1), compose(cat, g2, f2))
    rec.eq("interchange", lhs, rhs, [f1, f2, g1, g2])
    rec.eq("tensor_identities", cat.tensor(cat.identity(a1), cat.identity(a2)),
           cat.identity(cat.tensor_obj(a1, a2)), [])


def _law_monoidal(cat, rec, rng, max_dim):
    a, b, c, d, e, g_ = _objs(cat, rng, 6, max_dim, ((0, 2, 4), (1, 3, 5)))
    f, g, h = cat.sample_morphism(rng, a, b), cat.sample_morphism(rng, c, d), cat.sample_morphism(rng, e, g_)
    rec.eq("tensor_assoc", cat.tensor(cat.tensor(f, g), h), cat.tensor(f, cat.tensor(g, h)), [f, g, h])
    i = cat.identity(cat.unit())
    rec.eq("left_unitor", cat.tensor(i, f), f, [f])
    rec.eq("right_unitor", cat.tensor(f, i), f, [f])


def _law_symmetry(cat, rec, rng, max_dim):
    a, b, c, d = _objs(cat, rng, 4, max_dim, ((0, 1, 2), (2, 3)))
    s_ab, s_ba = cat.swap(a, b), cat.swap(b, a)
    rec.eq("swap_involutive", compose(cat, s_ba, s_ab), cat.identity(cat.tensor_obj(a, b)), [s_ab])
    f, g = cat.sample_morphism(rng, a, c), cat.sample_morphism(rng, b, d)
    rec.eq("swap_natural", compose(cat, cat.swap(c, d), cat.tensor(f, g)),
           compose(cat, cat.tensor(g, f), s_ab), [f, g])
    # hexagon: σ_{A,B⊗C} = (id_B ⊗ σ_{A,C}) ∘ (σ_{A,B} ⊗ id_C)
    lhs = cat.swap(a, cat.tensor_obj(b, c))
    rhs = compose(cat, cat.tensor(cat.identity(b), cat.swap(a, c)), cat.tensor(s_ab, cat.identity(c)))
    rec.eq("hexagon", lhs, rhs, [])
    rec.eq("swap_unit", cat.swap(a, cat.unit()), cat.identity(a), [])


def _law_dagger(cat, rec, rng, max_dim):
    a, b, c = _objs(cat, rng, 3, max_dim)
    f, g = cat.sample_morphism(rng, a, b), cat.sample_morphism(rng, b, c)
    rec.eq("dagger_contravariant", cat.dagger(compose(cat, g, f)),
           compose(cat, cat.dagger(f), cat.dagger(g)), [f, g])
    rec.eq("dagger_involutive", cat.dagger(cat.dagger(f)), f, [f])
    rec.eq("dagger_identity", cat.dagger(cat.identity(a)), cat.identity(a), [])


def _law_dagger_monoidal(cat, rec, rng, max_dim):
    a, b, c, d = _objs(cat, rng, 4, max_dim, ((0, 2), (1, 3)))
    f, g = cat.sample_morphism(rng, a, b), cat.sample_morphism(rng, c, d)
    rec.eq("dagger_tensor", cat.dagger(cat.tensor(f, g)), cat.tensor(cat.dagger(f), cat.dagger(g)), [f, g])
    rec.eq("swap_unitary", cat.dagger(cat.swap(a, c)), cat.swap(c, a), [])


def _law_snake(cat, rec, rng, max_dim):
    (a,) = _objs(cat, rng, 1, max_dim, ((0, 0, 0),))
    ida, cup, cap = cat.identity(a), cat.cup(a), cat.cap(a)
    rec.eq("snake_left", compose(cat, cat.tensor(ida, cap), cat.tensor(cup, ida)), ida, [cup])
    rec.eq("snake_right", compose(cat, cat.tensor(cap, ida), cat.tensor(ida, cup)), ida, [cup])
    rec.eq("cup_symmetric", compose(cat, cat.swap(a, a), cup), cup, [cup])
    rec.eq("cap_is_cup_dagger", cap, cat.dagger(cup), [cup])


def _law_discard(cat, rec, rng, max_dim):
    a, b = _objs(cat, rng, 2, max_dim, ((0, 1),))
    i = cat.unit()
    rec.eq("discard_unit", cat.discard(i), cat.identity(i), [])
    rec.eq("discard_tensor", cat.discard(cat.tensor_obj(a, b)),
           cat.tensor(cat.discard(a), cat.discard(b)), [])
    rec.eq("swap_causal", compose(cat, cat.discard(cat.tensor_obj(b, a)), cat.swap(a, b)),
           cat.discard(cat.tensor_obj(a, b)), [])
    rec.truth("identity_causal", is_causal(cat, cat.identity(a), rec.tol), {"object": repr(a)})


def _law_zero(cat, rec, rng, max_dim):
    a, b, c = _objs(cat, rng, 3, max_dim, ((0, 2), (1, 2)))
    f = cat.sample_morphism(rng, a, b)
    rec.eq("zero_left", compose(cat, cat.zero(b, c), f), cat.zero(a, c), [f])
    rec.eq("zero_right", compose(cat, cat.sample_morphism(rng, b, c), cat.zero(a, b)), cat.zero(a, c), [])
    rec.eq("zero_tensor", cat.tensor(f, cat.zero(c, c)),
           cat.zero(cat.tensor_obj(a, c), cat.tensor_obj(b, c)), [f])


def _law_scalars(cat, rec, rng, max_dim):
    i = cat.unit()
    s, t = cat.sample_morphism(rng, i, i), cat.sample_morphism(rng, i, i)
    rec.eq("scalar_commute", compose(cat, s, t), compose(cat, t, s), [s, t])
    rec.eq("scalar_tensor_is_compose", cat.tensor(s, t), compose(cat, s, t), [s, t])


_LAWS: dict[str, Callable] = {
    "category": _law_category,
    "interchange": _law_interchange,
    "monoidal": _law_monoidal,
    "symmetry": _law_symmetry,
    "dagger": _law_dagger,
    "dagger_monoidal": _law_dagger_monoidal,
    "snake": _law_snake,
    "discard": _law_discard,
    "zero": _law_zero,
    "scalars": _law_scalars,
}


def check_laws(
    cat: Category,
    laws: Iterable[str] | str = "all",
    seed: int = 42,
    budget: int = 200,
    max_dim: int = 5,
    tol: float | None = None,
) -> dict[str, LawReport]:
    """Check each requested law family on ``budget`` seeded samples.

    Returns one :class:`LawReport` per family.
    """
    names = list(cat.laws) if laws == "all" else list(laws)
    for n in names:
        if n not in _LAWS:
            raise UnsupportedLaw(f"unknown law family {n!r}")
        if n not in cat.laws:
            raise UnsupportedLaw(f"{cat.name} does not support law family {n!r}")
    reports: dict[str, LawReport] = {}
    for k, n in enumerate(names):
        rng = np.random.default_rng([seed, k])
        report = LawReport(f"{cat.name}:{n}")
        rec = Recorder(cat, report, tol)
        t0 = time.perf_counter()
        for _ in range(budget):
            _LAWS[n](cat, rec, rng, max_dim)
            report.samples += 1
        report.elapsed_ms = (time.perf_counter() - t0) * 1e3
        reports[n] = report
    return reports
