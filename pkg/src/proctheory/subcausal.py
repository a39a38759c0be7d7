"""Sub-causal processes, partial addition, tests and totalisation.

Matrix conventions follow :mod:`proctheory.backends`: a morphism n -> m is an
m x n matrix and discarding on n is the all-ones row.  For matrices over
ℕ / ℚ≥0 / nonnegative floats a morphism is sub-causal when each column sums
to at most 1; the finite-set case is the 0/1 matrices over ℕ.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Sequence

import numpy as np

from .backends import MatMorphism, Rel, mat_cup_cap, matmul
from .catcore import LawFailure, LawReport, TypeMismatch
from .cpm import CpmMap, cpm_add, is_psd, partial_trace_output
from .scalars import BackendError, ScalarBackend, get_backend

ORDERED_BACKENDS = ("nat", "rat_nonneg", "rat", "float_real")


# ---------------------------------------------------------------------------
# sub-causality and partial addition
# ---------------------------------------------------------------------------


def _column_sums(f: MatMorphism):
    b = f.backend
    return [sum((f.data[r, c] for r in range(f.rows)), b.zero) for c in range(f.cols)]


def _nonneg(b: ScalarBackend, x, tol: float) -> bool:
    return x >= -tol if not b.exact else x >= 0


def is_sub_causal(f, tol: float | None = None) -> bool:
    """Whether ⊤∘f + e = ⊤ for some effect e.

    Matrices over an ordered backend: entries nonnegative and column sums at
    most 1.  Relations: always.  CPM maps: id − Tr_out(C) is PSD.
    """
    if isinstance(f, Rel):
        return True
    if isinstance(f, CpmMap):
        b = f.backend
        gap = b.eye(f.n_in) - partial_trace_output(f)
        return is_psd(b, gap, tol)
    if isinstance(f, MatMorphism):
        b = f.backend
        if b.name == "bool":
            return True
        if b.name not in ORDERED_BACKENDS:
            raise BackendError(f"sub-causality is not defined for backend {b.name}")
        tol = b.tol if tol is None else tol
        if not all(_nonneg(b, x, tol) for x in f.data.ravel()):
            return False
        one = b.one
        return all(s <= one + (tol if not b.exact else 0) for s in _column_sums(f))
    raise BackendError(f"cannot decide sub-causality of {type(f).__name__}")


def is_causal_mat(f: MatMorphism, tol: float | None = None) -> bool:
    """Column sums exactly one (⊤∘f = ⊤) for a matrix over an ordered backend."""
    b = f.backend
    if b.exact or tol is None:
        return all(b.eq(s, b.one) for s in _column_sums(f))
    return all(abs(s - 1) <= tol * 2 for s in _column_sums(f))


def _generic_add(f, g):
    if isinstance(f, CpmMap):
        return cpm_add(f, g)
    return f.add(g)


def _generic_equal(f, g, tol=None) -> bool:
    if isinstance(f, CpmMap):
        from .cpm import cpm_equal

        return cpm_equal(f, g, tol)
    return f.equal(g, tol)


@dataclass
class PartialAdd:
    """Partial addition f ⋁ g = f + g, defined exactly when f + g is sub-causal."""

    add: Callable = _generic_add
    sub_causal: Callable = is_sub_causal
    equal: Callable = _generic_equal
    tol: float | None = None

    def ovee(self, f, g):
        """Return f ⋁ g, or None when undefined."""
        s = self.add(f, g)
        return s if self.sub_causal(s, self.tol) else None

    def defined(self, f, g) -> bool:
        return self.ovee(f, g) is not None

    def ovee_all(self, items: Sequence):
        """Left fold; None as soon as a partial sum is undefined."""
        acc = items[0]
        for x in items[1:]:
            acc = self.ovee(acc, x)
            if acc is None:
                return None
        return acc


def check_pcm_laws(pa: PartialAdd, sampler: Callable, zero: Callable, samples: int = 200, seed: int = 42) -> LawReport:
    """Commutativity, unit, associativity-where-defined and the downset
    property on sampled triples from ``sampler(rng)``."""
    rng = np.random.default_rng(seed)
    report = LawReport("pcm_laws")
    t0 = time.perf_counter()

    def fail(law, inputs):
        if len(report.failures) < 5:
            report.failures.append(LawFailure(law, [repr(x) for x in inputs], None, None, float("nan")))
        else:
            report.failures.append(LawFailure(law, [], None, None, float("nan")))

    for _ in range(samples):
        f, g, h = sampler(rng)
        fg, gf = pa.ovee(f, g), pa.ovee(g, f)
        if (fg is None) != (gf is None) or (fg is not None and not pa.equal(fg, gf, pa.tol)):
            fail("commutativity", [f, g])
        z = zero(f)
        f0 = pa.ovee(f, z)
        if f0 is None or not pa.equal(f0, f, pa.tol):
            fail("unit", [f])
        left = None if fg is None else pa.ovee(fg, h)
        gh = pa.ovee(g, h)
        right = None if gh is None else pa.ovee(f, gh)
        if (left is None) != (right is None) or (left is not None and not pa.equal(left, right, pa.tol)):
            fail("associativity", [f, g, h])
        if fg is not None and not (pa.sub_causal(f, pa.tol) and pa.sub_causal(g, pa.tol)):
            fail("downset", [f, g])
        report.samples += 1
    report.elapsed_ms = (time.perf_counter() - t0) * 1e3
    return report


def random_substochastic(backend: ScalarBackend, rng: np.random.Generator, n: int, m: int,
                         mass: float | None = None, denominator: int = 12) -> MatMorphism:
    """A random sub-stochastic m x n matrix; each column has total mass drawn
    uniformly from [0, 1] (or equal to ``mass``).  Exact backends get
    entries with the given denominator."""
    cols = []
    for _ in range(n):
        total = rng.random() if mass is None else mass
        w = rng.random(m)
        w = w / w.sum() * total if w.sum() > 0 else w
        cols.append(w)
    data = np.array(cols).T
    if backend.exact:
        # floor to the grid so column sums never exceed the target
        ints = np.floor(data * denominator).astype(int)
        if mass is not None and mass == 1:
            for c in range(n):
                ints[int(rng.integers(m)), c] += denominator - ints[:, c].sum()
        data = np.array([[Fraction(int(x), denominator) for x in row] for row in ints], dtype=object)
        if backend.name == "nat":
            data = np.array([[int(x) for x in row] for row in data], dtype=object)
        return MatMorphism(backend, data)
    return MatMorphism(backend, data.astype(backend.dtype))


def random_partial_function(rng: np.random.Generator, n: int, m: int, p_undefined: float = 0.3) -> MatMorphism:
    """A partial function n -> m as a 0/1 matrix over ℕ."""
    b = get_backend("nat")
    data = np.full((m, n), 0, dtype=object)
    for c in range(n):
        if m and rng.random() >= p_undefined:
            data[int(rng.integers(m)), c] = 1
    return MatMorphism(b, data)


def random_function(rng: np.random.Generator, n: int, m: int) -> MatMorphism:
    return random_partial_function(rng, n, m, 0.0)


# ---------------------------------------------------------------------------
# tests and coarse-graining
# ---------------------------------------------------------------------------


def _stack(backend: ScalarBackend, mats: Sequence[np.ndarray], cols: int) -> np.ndarray:
    if not mats:
        return backend.zeros(0, cols)
    return np.concatenate(list(mats), axis=0)


@dataclass(frozen=True, eq=False)
class TestMorphism:
    """A family of events f_i : A -> B_i held as one carrier A -> ⊕ B_i.

    The carrier is the block column whose i-th block is f_i; the events are
    recovered as ▷_i ∘ carrier.
    """

    source: int
    targets: tuple
    carrier: MatMorphism

    __test__ = False  # not a pytest class

    @classmethod
    def from_events(cls, events: Sequence[MatMorphism]) -> "TestMorphism":
        if not events:
            raise ValueError("a test needs at least one event")
        src = events[0].cols
        if any(e.cols != src for e in events):
            raise TypeMismatch("events of a test share their source")
        b = events[0].backend
        data = _stack(b, [e.data for e in events], src)
        return cls(src, tuple(e.rows for e in events), MatMorphism(b, data))

    def _offsets(self):
        return np.cumsum((0,) + tuple(self.targets))

    def event(self, i: int) -> MatMorphism:
        off = self._offsets()
        return MatMorphism(self.carrier.backend, self.carrier.data[off[i] : off[i + 1], :].copy())

    def events(self) -> list[MatMorphism]:
        return [self.event(i) for i in range(len(self.targets))]

    def is_test(self, tol: float | None = None) -> bool:
        """Test ⇔ carrier causal."""
        return is_causal_mat(self.carrier, tol)

    def reconstruct(self) -> MatMorphism:
        """Σ κ_i ∘ f_i, rebuilt from the events alone."""
        b = self.carrier.backend
        total = sum(self.targets)
        off = self._offsets()
        acc = MatMorphism(b, b.zeros(total, self.source))
        for i, e in enumerate(self.events()):
            kappa = b.zeros(total, self.targets[i])
            for r in range(self.targets[i]):
                kappa[off[i] + r, r] = b.one
            acc = acc.add(MatMorphism(b, kappa).compose(e))
        return acc


def codiagonal(backend: ScalarBackend, target: int, copies: int) -> MatMorphism:
    """∇ : B + … + B -> B."""
    return MatMorphism(backend, np.concatenate([backend.eye(target)] * copies, axis=1) if copies
                       else backend.zeros(target, 0))


def coarse_grain(t: TestMorphism, branches: Sequence[int] | None = None) -> MatMorphism:
    """Merge the selected branches: ∇ ∘ (restricted carrier).

    The result equals the left-fold sum of the selected events.
    """
    branches = list(range(len(t.targets))) if branches is None else list(branches)
    if not branches:
        raise ValueError("select at least one branch")
    targets = {t.targets[i] for i in branches}
    if len(targets) != 1:
        raise TypeMismatch("merged branches must share their target")
    (tgt,) = targets
    b = t.carrier.backend
    restricted = MatMorphism(b, _stack(b, [t.event(i).data for i in branches], t.source))
    return codiagonal(b, tgt, len(branches)).compose(restricted)


def sum_events(events: Sequence[MatMorphism]) -> MatMorphism:
    acc = events[0]
    for e in events[1:]:
        acc = acc.add(e)
    return acc


# ---------------------------------------------------------------------------
# Par: partial arrows A -> B + 1
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PartialArrow:
    """A morphism A -> B + 1 in a test-category backend, given as a causal
    (b+1) x a matrix whose last row is the "undefined" outcome."""

    arrow: MatMorphism

    @property
    def src(self) -> int:
        return self.arrow.cols

    @property
    def tgt(self) -> int:
        return self.arrow.rows - 1

    @property
    def backend(self) -> ScalarBackend:
        return self.arrow.backend

    def defined_part(self) -> MatMorphism:
        """The sub-causal morphism A -> B obtained by dropping the 1 branch."""
        return MatMorphism(self.backend, self.arrow.data[:-1, :].copy())

    def equal(self, other: "PartialArrow", tol: float | None = None) -> bool:
        return self.arrow.equal(other.arrow, tol)


def _kleisli_extend(g: PartialArrow) -> MatMorphism:
    """[g, κ₂] : B + 1 -> C + 1."""
    b = g.backend
    last = b.zeros(g.tgt + 1, 1)
    last[g.tgt, 0] = b.one
    return MatMorphism(b, np.concatenate([g.arrow.data, last], axis=1))


def par_compose(g: PartialArrow, f: PartialArrow) -> PartialArrow:
    """Kleisli composite [g, κ₂] ∘ f."""
    if f.tgt != g.src:
        raise TypeMismatch(f"cannot compose partial arrows {f.src}->{f.tgt} then {g.src}->{g.tgt}")
    return PartialArrow(_kleisli_extend(g).compose(f.arrow))


def par_lift(f: MatMorphism) -> PartialArrow:
    """κ₁ ∘ f."""
    b = f.backend
    return PartialArrow(MatMorphism(b, np.concatenate([f.data, b.zeros(1, f.cols)], axis=0)))


def par_identity(backend: ScalarBackend, n: int) -> PartialArrow:
    return par_lift(MatMorphism(backend, backend.eye(n)))


def par_zero(backend: ScalarBackend, n: int, m: int) -> PartialArrow:
    """κ₂ ∘ ⊤: everywhere undefined."""
    data = backend.zeros(m + 1, n)
    for c in range(n):
        data[m, c] = backend.one
    return PartialArrow(MatMorphism(backend, data))


def par_from_subcausal(f: MatMorphism) -> PartialArrow:
    """Append the missing mass 1 − Σ_i f_ij as the undefined outcome."""
    if not is_sub_causal(f):
        raise ValueError("morphism is not sub-causal")
    b = f.backend
    sums = _column_sums(f)
    row = b.array([[b.one - s for s in sums]]) if f.cols else b.zeros(1, 0)
    return PartialArrow(MatMorphism(b, np.concatenate([f.data, row], axis=0)))


def partial_function_of(p: PartialArrow) -> dict[int, int]:
    """Read a deterministic partial arrow as a dict x -> y (undefined omitted)."""
    out = {}
    for c in range(p.src):
        col = [int(v) for v in p.arrow.data[:, c]]
        r = col.index(1)
        if r < p.tgt:
            out[c] = r
    return out


def is_total(p: PartialArrow, tol: float | None = None) -> bool:
    """⊤ ∘ f = ⊤ in Par: the defined part is causal."""
    return is_causal_mat(p.defined_part(), tol)


def factor_through_lift(p: PartialArrow, tol: float | None = None) -> MatMorphism | None:
    """Constructively find a causal h with κ₁ ∘ h = p, or None."""
    h = p.defined_part()
    if not is_causal_mat(h, tol):
        return None
    return h if par_lift(h).equal(p, tol) else None


# ---------------------------------------------------------------------------
# test-category checks
# ---------------------------------------------------------------------------


def partial_projection(backend: ScalarBackend, dims: Sequence[int], i: int, corrupt: bool = False) -> MatMorphism:
    """▷_i : B_1 + … + B_n -> B_i + 1 keeping branch i and sending the rest to 1.

    ``corrupt`` duplicates the first column of the kept block onto the
    second, a deliberately broken projection used to self-test the harness.
    """
    total = sum(dims)
    off = np.cumsum((0,) + tuple(dims))
    data = backend.zeros(dims[i] + 1, total)
    for c in range(total):
        if off[i] <= c < off[i + 1]:
            data[c - off[i], c] = backend.one
        else:
            data[dims[i], c] = backend.one
    if corrupt and dims[i] >= 2:
        data[:, off[i] + 1] = data[:, off[i]]
    return MatMorphism(backend, data)


@dataclass
class TestCategoryBackend:
    """A causal backend with finite coproducts: ``finset`` (functions as 0/1
    matrices over ℕ) or ``stochastic`` (column-stochastic matrices over ℚ≥0)."""

    kind: str = "stochastic"
    corrupt: bool = False

    __test__ = False

    def __post_init__(self):
        if self.kind not in ("finset", "stochastic"):
            raise BackendError(f"unknown test-category backend {self.kind!r}")
        self.backend = get_backend("nat" if self.kind == "finset" else "rat_nonneg")

    def causal(self, rng, n, m) -> MatMorphism:
        if self.kind == "finset":
            return random_function(rng, n, m)
        return random_substochastic(self.backend, rng, n, m, mass=1.0)

    def sub_causal(self, rng, n, m) -> MatMorphism:
        if self.kind == "finset":
            return random_partial_function(rng, n, m)
        return random_substochastic(self.backend, rng, n, m)

    def partial_arrow(self, rng, n, m) -> PartialArrow:
        if rng.random() < 0.5:
            return par_lift(self.causal(rng, n, m))
        return PartialArrow(self.causal(rng, n, m + 1))

    def projection(self, dims, i) -> MatMorphism:
        return partial_projection(self.backend, dims, i, self.corrupt)

    def points(self, n: int) -> list[MatMorphism]:
        """Deterministic states 1 -> n."""
        b = self.backend
        out = []
        for r in range(n):
            d = b.zeros(n, 1)
            d[r, 0] = b.one
            out.append(MatMorphism(b, d))
        return out


def _joint_reconstruct(backend: ScalarBackend, p1: MatMorphism, p2: MatMorphism, a: int, b: int) -> MatMorphism:
    return MatMorphism(backend, np.concatenate([p1.data[:a, :], p2.data[:b, :]], axis=0))


def check_test_category(kind: str = "stochastic", max_dim: int = 4, samples: int = 200, seed: int = 42,
                        corrupt: bool = False) -> LawReport:
    """Joint monicity of (▷₁, ▷₂), the causal-factoring characterisation of
    total partial arrows, strong algebraicity of event tuples and causality
    of coarse-grained causal tests."""
    tb = TestCategoryBackend(kind, corrupt)
    bk = tb.backend
    rng = np.random.default_rng([seed, 7])
    report = LawReport(f"test_category[{kind}{',corrupt' if corrupt else ''}]")
    t0 = time.perf_counter()

    def fail(law, inputs, lhs=None, rhs=None):
        if len(report.failures) < 20:
            report.failures.append(LawFailure(law, inputs, lhs, rhs, float("nan")))

    def dims():
        return int(rng.integers(1, max_dim + 1))

    for _ in range(samples):
        x, a, b = dims(), dims(), dims()
        # (a) joint monicity: x ↦ (▷₁x, ▷₂x) has a left inverse
        f = tb.causal(rng, x, a + b)
        p1, p2 = tb.projection((a, b), 0), tb.projection((a, b), 1)
        rebuilt = _joint_reconstruct(bk, p1.compose(f), p2.compose(f), a, b)
        if not rebuilt.equal(f):
            fail("joint_monicity", [f.to_json()], rebuilt.to_json(), f.to_json())
        # (b) total ⇔ factors as κ₁ ∘ (causal)
        p = tb.partial_arrow(rng, x, a)
        if is_total(p) != (factor_through_lift(p) is not None):
            fail("causal_factoring", [p.arrow.to_json()])
        # (c) strong algebraicity and (d) coarse-graining
        k = int(rng.integers(1, 4))
        if rng.random() < 0.5:
            carrier = tb.causal(rng, x, a * k)
            events = [MatMorphism(bk, carrier.data[i * a : (i + 1) * a, :].copy()) for i in range(k)]
        else:
            events = [tb.sub_causal(rng, x, a) for _ in range(k)]
        discarded = [MatMorphism(bk, np.array([_column_sums(e)], dtype=object)) for e in events]
        t = TestMorphism.from_events(events)
        if is_causal_mat(sum_events(discarded)) and not t.is_test():
            fail("strong_algebraicity", [e.to_json() for e in events])
        if not t.reconstruct().equal(t.carrier):
            fail("event_reconstruction", [t.carrier.to_json()])
        merged = coarse_grain(t)
        if t.is_test() and not is_causal_mat(merged):
            fail("coarse_grain_causal", [t.carrier.to_json()], merged.to_json())
        if not merged.equal(sum_events(events)):
            fail("coarse_grain_is_sum", [t.carrier.to_json()])
        report.samples += 1
    # exhaustive injectivity on deterministic points (finds corrupted ▷)
    for a in range(1, max_dim + 1):
        for b in range(1, max_dim + 1):
            p1, p2 = tb.projection((a, b), 0), tb.projection((a, b), 1)
            seen: dict = {}
            for idx, pt in enumerate(tb.points(a + b)):
                key = (tuple(map(str, p1.compose(pt).data.ravel())), tuple(map(str, p2.compose(pt).data.ravel())))
                if key in seen:
                    fail("joint_monicity_witness", [{"dims": [a, b], "x": seen[key], "y": idx}])
                seen[key] = idx
    report.elapsed_ms = (time.perf_counter() - t0) * 1e3
    return report


# ---------------------------------------------------------------------------
# finite PCMs and totalisation
# ---------------------------------------------------------------------------


@dataclass
class FinitePCM:
    """A finite partial commutative monoid given by its table.

    ``table[(a, b)]`` is a ⋁ b when defined; missing pairs are undefined.
    """

    elements: list
    zero: Hashable
    table: dict = field(default_factory=dict)

    def ovee(self, a, b):
        if a == self.zero:
            return b
        if b == self.zero:
            return a
        r = self.table.get((a, b))
        return self.table.get((b, a)) if r is None else r

    def ovee_word(self, word: Sequence):
        """Left fold a1 ⋁ … ⋁ an, None when some partial sum is undefined."""
        acc = self.zero
        for x in word:
            acc = self.ovee(acc, x)
            if acc is None:
                return None
        return acc

    def check_axioms(self) -> list[tuple]:
        """Violations of commutativity, unit and associativity."""
        bad = []
        for a in self.elements:
            if self.ovee(a, self.zero) != a:
                bad.append(("unit", a))
            for b in self.elements:
                if self.ovee(a, b) != self.ovee(b, a):
                    bad.append(("commutativity", a, b))
                for c in self.elements:
                    ab, bc = self.ovee(a, b), self.ovee(b, c)
                    left = None if ab is None else self.ovee(ab, c)
                    right = None if bc is None else self.ovee(a, bc)
                    if left != right:
                        bad.append(("associativity", a, b, c))
        return bad

    def to_json(self) -> dict:
        rows = []
        for a, b in itertools.combinations_with_replacement(self.elements, 2):
            r = self.ovee(a, b)
            rows.append([str(a), str(b), None if r is None else str(r)])
        return {"elements": [str(e) for e in self.elements], "zero": str(self.zero), "ovee": rows}

    @classmethod
    def from_json(cls, obj: dict) -> "FinitePCM":
        table = {}
        for a, b, r in obj["ovee"]:
            if r is not None:
                table[(a, b)] = r
        return cls(list(obj["elements"]), obj["zero"], table)


def unit_interval_pcm(denominator: int) -> FinitePCM:
    """{0, 1/d, …, 1} with p ⋁ q = p + q when p + q ≤ 1."""
    elems = [Fraction(k, denominator) for k in range(denominator + 1)]
    table = {(p, q): p + q for p in elems for q in elems if p + q <= 1}
    return FinitePCM(elems, Fraction(0), table)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if repr(ry) < repr(rx):
                rx, ry = ry, rx
            self.parent[ry] = rx


@dataclass
class TotalClass:
    representative: tuple
    words: list
    certified: bool


@dataclass
class Totalisation:
    """Bounded congruence closure of a finite PCM on multisets (sorted tuples
    of nonzero elements).  A class is certified when no member can be split
    into a word longer than ``max_word``, so no rewrite leaves the bound."""

    pcm: FinitePCM
    max_word: int
    classes: list
    _index: dict

    def key(self, word: Sequence) -> tuple:
        return _canon(self.pcm, word)

    def class_of(self, word: Sequence) -> TotalClass:
        return self.classes[self._index[self.key(word)]]

    def same(self, w1: Sequence, w2: Sequence) -> bool:
        return self._index[self.key(w1)] == self._index[self.key(w2)]

    def certified_classes(self) -> list:
        return [c for c in self.classes if c.certified]

    def verify_downset(self) -> list[tuple]:
        """Distinct elements of M in certified classes stay distinct."""
        bad = []
        elems = [e for e in self.pcm.elements if e != self.pcm.zero]
        for a, b in itertools.combinations([self.pcm.zero] + elems, 2):
            ca, cb = self.class_of([a]), self.class_of([b])
            if ca.certified and cb.certified and ca is cb:
                bad.append((a, b))
        return bad

    def verify_totalisation_fact(self) -> list[tuple]:
        """[a1 + … + an] = [b] implies the a_i are summable with sum b, on
        every certified word."""
        bad = []
        for c in self.certified_classes():
            singles = [w for w in c.words if len(w) <= 1]
            if not singles:
                continue
            b = singles[0][0] if singles[0] else self.pcm.zero
            for w in c.words:
                s = self.pcm.ovee_word(w)
                if s is None or s != b:
                    bad.append((w, b, s))
        return bad


def _canon(pcm: FinitePCM, word: Sequence) -> tuple:
    order = {e: i for i, e in enumerate(pcm.elements)}
    return tuple(sorted((x for x in word if x != pcm.zero), key=order.__getitem__))


def totalise_pcm(pcm: FinitePCM, max_word: int = 4) -> Totalisation:
    """Congruence closure on words of length ≤ max_word generated by
    {x, y} -> {x ⋁ y} (zeros dropped)."""
    if max_word < 2:
        raise ValueError("max_word must be at least 2")
    nonzero = [e for e in pcm.elements if e != pcm.zero]
    uf = _UnionFind()
    words = [()]
    for n in range(1, max_word + 1):
        words.extend(itertools.combinations_with_replacement(nonzero, n))
    for w in words:
        uf.add(w)
    splittable = set()
    for z in nonzero:
        for x in nonzero:
            for y in nonzero:
                if pcm.ovee(x, y) == z:
                    splittable.add(z)
    for w in words:
        for i, j in itertools.combinations(range(len(w)), 2):
            s = pcm.ovee(w[i], w[j])
            if s is None:
                continue
            rest = [w[k] for k in range(len(w)) if k not in (i, j)] + [s]
            uf.union(w, _canon(pcm, rest))
    groups: dict = {}
    for w in words:
        groups.setdefault(uf.find(w), []).append(w)
    classes, index = [], {}
    for members in sorted(groups.values(), key=lambda ws: (min(len(w) for w in ws), repr(sorted(ws, key=len)[0]))):
        members.sort(key=lambda w: (len(w), repr(w)))
        certified = not any(len(w) == max_word and any(x in splittable for x in w) for w in members)
        cls = TotalClass(members[0], members, certified)
        for w in members:
            index[w] = len(classes)
        classes.append(cls)
    return Totalisation(pcm, max_word, classes, index)


# ---------------------------------------------------------------------------
# the divisible-scalars pair representation
# ---------------------------------------------------------------------------


def _as_fraction(x) -> Fraction:
    return Fraction(x)


def total_rep_witness(fr: tuple, gs: tuple) -> tuple | None:
    """(a, b, n) with a·f = b·g, n·a = r, n·b = s and a, b ∈ [0, 1], or None.

    Over ℚ≥0 such a triple exists exactly when r·f = s·g: take n ≥ max(r, s),
    a = r/n and b = s/n.
    """
    (f, r), (g, s) = fr, gs
    if f.backend.name not in ("rat_nonneg", "rat", "nat"):
        raise BackendError("pair representation needs naturally divisible rational scalars")
    if (f.rows, f.cols) != (g.rows, g.cols):
        raise TypeMismatch("pairs must represent morphisms of one type")
    r, s = _as_fraction(r), _as_fraction(s)
    if r < 0 or s < 0:
        raise ValueError("scalars must be nonnegative")
    n = max(1, int(np.ceil(float(max(r, s)))))
    while Fraction(n) < max(r, s):
        n += 1
    a, b = r / n, s / n
    bk = get_backend("rat_nonneg")
    fa = MatMorphism(bk, np.vectorize(lambda v: Fraction(v) * a, otypes=[object])(f.data))
    gb = MatMorphism(bk, np.vectorize(lambda v: Fraction(v) * b, otypes=[object])(g.data))
    return (a, b, n) if fa.equal(gb) else None


def total_rep_equal(fr: tuple, gs: tuple) -> bool:
    return total_rep_witness(fr, gs) is not None


def total_rep_compose(gs: tuple, fr: tuple) -> tuple:
    """[(g, s)] ∘ [(f, r)] = [(g ∘ f, s·r)]."""
    (g, s), (f, r) = gs, fr
    return (g.compose(f), _as_fraction(s) * _as_fraction(r))


# ---------------------------------------------------------------------------
# compactness via scaled snakes
# ---------------------------------------------------------------------------


@dataclass
class ScaledSnake:
    dim: int
    n: int
    state_sub_causal: bool
    effect_sub_causal: bool
    left: bool
    right: bool

    @property
    def passed(self) -> bool:
        return self.state_sub_causal and self.effect_sub_causal and self.left and self.right


def scaled_snake_check(dim: int) -> ScaledSnake:
    """In Mat over ℚ≥0 the state η = cup/d and the effect ε = cap are
    sub-causal, and both snakes equal (1/d)·id."""
    b = get_backend("rat_nonneg")
    cup, cap = mat_cup_cap(b, dim)
    eta = cup.scale(Fraction(1, dim))
    ida = MatMorphism(b, b.eye(dim))
    target = ida.scale(Fraction(1, dim))
    left = ida.tensor(cap).compose(eta.tensor(ida))
    right = cap.tensor(ida).compose(ida.tensor(eta))
    return ScaledSnake(dim, dim, is_sub_causal(eta), is_sub_causal(cap), left.equal(target), right.equal(target))
