"""Concrete categories: matrices over a scalar backend, finite relations,
biproduct completions, and closure-generated subcategories of relations
(the Spekkens toy model)."""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .catcore import Category, LawReport, TypeMismatch
from .scalars import (
    BackendError,
    GaussRat,
    ScalarBackend,
    get_backend,
    payload_from_json,
    payload_to_json,
)

# ---------------------------------------------------------------------------
# fast exact matrix products
# ---------------------------------------------------------------------------


def _lcm_den(a: np.ndarray) -> int:
    d = 1
    for x in a.flat:
        d = math.lcm(d, x.denominator)
    return d


def _scaled(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Integer matrix and common denominator for a rational matrix."""
    d = _lcm_den(a)
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = x.numerator * (d // x.denominator)
    return out, d


_QZERO = Fraction(0)
_GZERO = GaussRat(0, 0)


def _unscaled(ints: np.ndarray, den: int) -> np.ndarray:
    out = np.full(ints.shape, _QZERO, dtype=object)
    for idx in zip(*np.nonzero(ints)):
        out[idx] = Fraction(ints[idx], den)
    return out


def _split(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    re = np.empty(m.shape, dtype=object)
    im = np.empty(m.shape, dtype=object)
    for idx, x in np.ndenumerate(m):
        re[idx], im[idx] = x.re, x.im
    return re, im


def _join(re: np.ndarray, im: np.ndarray) -> np.ndarray:
    out = np.full(re.shape, _GZERO, dtype=object)
    for idx in zip(*np.nonzero((re != 0) | (im != 0))):
        out[idx] = GaussRat._make(re[idx], im[idx])
    return out


_INT64_SAFE = 2**62


def _int_op(op, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact integer ``op`` on object arrays, via int64 when it cannot overflow."""
    ma = max((abs(x) for x in a.flat), default=0)
    mb = max((abs(x) for x in b.flat), default=0)
    inner = a.shape[1] if op is np.matmul else 1
    if ma * mb * max(inner, 1) < _INT64_SAFE:
        return op(a.astype(np.int64), b.astype(np.int64)).astype(object)
    return op(a, b)


def _rat_bilinear(op, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ia, da = _scaled(a)
    ib, db = _scaled(b)
    return _unscaled(_int_op(op, ia, ib), da * db)


def _gauss_bilinear(op, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ar, ai = _split(a)
    br, bi = _split(b)
    (ar, ai), da = _scaled_pair(ar, ai)
    (br, bi), db = _scaled_pair(br, bi)
    rr = _int_op(op, ar, br) - _int_op(op, ai, bi)
    ii = _int_op(op, ar, bi) + _int_op(op, ai, br)
    den = da * db
    return _join(_unscaled(rr, den), _unscaled(ii, den))


def _scaled_pair(re: np.ndarray, im: np.ndarray):
    d = math.lcm(_lcm_den(re), _lcm_den(im))
    outs = []
    for m in (re, im):
        o = np.empty(m.shape, dtype=object)
        for idx, x in np.ndenumerate(m):
            o[idx] = x.numerator * (d // x.denominator)
        outs.append(o)
    return tuple(outs), d


def matmul(backend: ScalarBackend, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise TypeMismatch(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[1] == 0 or a.shape[0] == 0 or b.shape[1] == 0:
        return backend.zeros(a.shape[0], b.shape[1])
    if backend.name in ("rat", "rat_nonneg"):
        return _rat_bilinear(np.matmul, a, b)
    if backend.name in ("gauss_rat", "gauss_rat_trivial"):
        return _gauss_bilinear(np.matmul, a, b)
    return a @ b


def kron(backend: ScalarBackend, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.size == 0 or b.size == 0:
        return backend.zeros(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1])
    if backend.name in ("rat", "rat_nonneg"):
        return _rat_bilinear(np.kron, a, b)
    if backend.name in ("gauss_rat", "gauss_rat_trivial"):
        return _gauss_bilinear(np.kron, a, b)
    return np.kron(a, b)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MatMorphism:
    """An m x n matrix viewed as a morphism n -> m; column j is the image of
    basis state j."""

    backend: ScalarBackend
    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ValueError("matrix data must be 2-dimensional")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    src = cols
    tgt = rows

    def compose(self, f: "MatMorphism") -> "MatMorphism":
        """``self ∘ f``."""
        self._same(f)
        if f.rows != self.cols:
            raise TypeMismatch(f"cannot compose {self.rows}x{self.cols} after {f.rows}x{f.cols}")
        return MatMorphism(self.backend, matmul(self.backend, self.data, f.data))

    def tensor(self, g: "MatMorphism") -> "MatMorphism":
        self._same(g)
        return MatMorphism(self.backend, kron(self.backend, self.data, g.data))

    def dagger(self) -> "MatMorphism":
        return MatMorphism(self.backend, self.backend.conj_array(self.data).T.copy())

    def add(self, g: "MatMorphism") -> "MatMorphism":
        self._same(g)
        if self.data.shape != g.data.shape:
            raise TypeMismatch("cannot add matrices of different shapes")
        if self.backend.name == "bool":
            return MatMorphism(self.backend, self.data | g.data)
        return MatMorphism(self.backend, self.data + g.data)

    def scale(self, s) -> "MatMorphism":
        s = self.backend.coerce(s)
        if self.backend.name == "bool":
            return MatMorphism(self.backend, self.data & s)
        return MatMorphism(self.backend, self.data * s)

    def equal(self, g: "MatMorphism", tol: float | None = None) -> bool:
        return self.backend.arrays_equal(self.data, g.data, tol)

    def _same(self, g):
        if not isinstance(g, MatMorphism):
            raise TypeMismatch(f"expected a matrix morphism, got {type(g).__name__}")
        if g.backend.name != self.backend.name:
            raise BackendError(f"backend mismatch: {self.backend.name} vs {g.backend.name}")

    def __matmul__(self, f):
        return self.compose(f)

    def __repr__(self):
        return f"MatMorphism[{self.backend.name}]({self.data.tolist()})"

    def to_json(self) -> dict:
        b = self.backend.name
        return {
            "backend": b,
            "src": self.cols,
            "tgt": self.rows,
            "payload": [[payload_to_json(b, x) for x in row] for row in self.data.tolist()],
        }


def mat(backend: ScalarBackend | str, rows: Sequence[Sequence[Any]]) -> MatMorphism:
    if isinstance(backend, str):
        backend = get_backend(backend)
    return MatMorphism(backend, backend.array(rows))


def mat_from_json(obj: dict, tol: float | None = None) -> MatMorphism:
    backend = get_backend(obj["backend"]) if tol is None else get_backend(obj["backend"], tol)
    rows = [[payload_from_json(backend.name, x) for x in row] for row in obj["payload"]]
    if not rows:
        return MatMorphism(backend, backend.zeros(obj["tgt"], obj["src"]))
    m = mat(backend, rows)
    if (m.rows, m.cols) != (obj["tgt"], obj["src"]):
        raise ValueError("payload shape does not match src/tgt")
    return m


def swap_permutation(a: int, b: int) -> list[int]:
    """Index map of σ_{A,B}: basis |x,y> (index x*b + y) goes to |y,x>."""
    return [y * a + x for x in range(a) for y in range(b)]


def mat_cup_cap(backend: ScalarBackend, n: int) -> tuple[MatMorphism, MatMorphism]:
    """Self-duality of n: cup = Σ_i |ii>, cap = its transpose."""
    cup = backend.zeros(n * n, 1)
    for i in range(n):
        cup[i * n + i, 0] = backend.one
    c = MatMorphism(backend, cup)
    return c, MatMorphism(backend, cup.T.copy())


class MatCategory(Category):
    """Mat_S: objects are natural numbers, morphisms n -> m are m x n matrices."""

    laws = (
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

    def __init__(self, backend: ScalarBackend | str, name: str | None = None):
        if isinstance(backend, str):
            backend = get_backend(backend)
        self.backend = backend
        self.name = name or f"mat_{backend.name}"
        self.exact = backend.exact
        self.tol = backend.tol

    def unit(self):
        return 1

    def tensor_obj(self, a, b):
        return a * b

    def sample_object(self, rng, max_dim):
        return int(rng.integers(1, max_dim + 1))

    def src(self, f):
        return f.cols

    def tgt(self, f):
        return f.rows

    def identity(self, a):
        return MatMorphism(self.backend, self.backend.eye(a))

    def compose(self, g, f):
        return g.compose(f)

    def tensor(self, f, g):
        return f.tensor(g)

    def swap(self, a, b):
        m = self.backend.zeros(a * b, a * b)
        for col, row in enumerate(swap_permutation(a, b)):
            m[row, col] = self.backend.one
        return MatMorphism(self.backend, m)

    def permutation(self, perm: Sequence[int]) -> MatMorphism:
        """Matrix sending basis i to basis perm[i]."""
        n = len(perm)
        m = self.backend.zeros(n, n)
        for i, j in enumerate(perm):
            m[j, i] = self.backend.one
        return MatMorphism(self.backend, m)

    def dagger(self, f):
        return f.dagger()

    def discard(self, a):
        return MatMorphism(self.backend, self.backend.ones(1, a))

    def zero(self, a, b):
        return MatMorphism(self.backend, self.backend.zeros(b, a))

    def cup(self, a):
        return mat_cup_cap(self.backend, a)[0]

    def cap(self, a):
        return mat_cup_cap(self.backend, a)[1]

    def add(self, f, g):
        return f.add(g)

    def sample_morphism(self, rng, a, b):
        return MatMorphism(self.backend, self.backend.random_array(rng, b, a))

    def equal(self, f, g, tol=None):
        return f.equal(g, tol)

    def deviation(self, f, g):
        return self.backend.deviation(f.data, g.data)

    def to_json(self, f):
        return f.to_json()


class RelCategory(MatCategory):
    """Finite sets and relations, as Boolean matrices; dagger is converse."""

    def __init__(self):
        super().__init__(get_backend("bool"), name="rel")


def column_sums_equal_one(f: MatMorphism) -> bool:
    """Independent causality test for Mat_S: every column sums to 1."""
    b = f.backend
    for j in range(f.cols):
        s = b.zero
        for i in range(f.rows):
            s = b.add(s, f.data[i, j])
        if not b.eq(s, b.one):
            return False
    return True


# ---------------------------------------------------------------------------
# relations
# ---------------------------------------------------------------------------


def relation_from_pairs(dom: int, cod: int, pairs: Iterable[tuple[int, int]]) -> MatMorphism:
    b = get_backend("bool")
    m = b.zeros(cod, dom)
    for i, j in pairs:
        m[j, i] = True
    return MatMorphism(b, m)


def relation_pairs(r: MatMorphism) -> list[tuple[int, int]]:
    """Canonical form: sorted (input, output) index pairs."""
    return sorted((int(i), int(j)) for j, i in zip(*np.nonzero(r.data)))


def relation_to_json(r: MatMorphism) -> dict:
    return {"dom": r.cols, "cod": r.rows, "pairs": [list(p) for p in relation_pairs(r)]}


def relation_from_json(obj: dict) -> MatMorphism:
    return relation_from_pairs(obj["dom"], obj["cod"], [tuple(p) for p in obj["pairs"]])


# ---------------------------------------------------------------------------
# biproduct completion
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BlockMorphism:
    """A matrix of base morphisms; ``blocks[j][i] : src[i] -> tgt[j]``."""

    src: tuple
    tgt: tuple
    blocks: tuple

    def block(self, j: int, i: int):
        return self.blocks[j][i]


class BiproductCompletion(Category):
    """C^⊕ for a base category with zero morphisms and addition.

    Objects are tuples of base objects; composition multiplies block matrices
    using the base addition.
    """

    def __init__(self, base: Category, add: Callable | None = None):
        add = add or getattr(base, "add", None)
        if add is None:
            raise BackendError(f"{base.name} has no addition; cannot form its biproduct completion")
        self.base = base
        self.add_base = add
        self.name = f"{base.name}_biprod"
        self.exact = base.exact
        self.tol = base.tol
        self.laws = tuple(l for l in base.laws if l not in ("snake",))

    def unit(self):
        return (self.base.unit(),)

    def tensor_obj(self, a, b):
        return tuple(self.base.tensor_obj(x, y) for x in a for y in b)

    def sample_object(self, rng, max_dim):
        k = int(rng.integers(1, 3))
        return tuple(self.base.sample_object(rng, max(1, max_dim // 2)) for _ in range(k))

    def src(self, f):
        return f.src

    def tgt(self, f):
        return f.tgt

    def identity(self, a):
        blocks = tuple(
            tuple(self.base.identity(a[i]) if i == j else self.base.zero(a[i], a[j]) for i in range(len(a)))
            for j in range(len(a))
        )
        return BlockMorphism(a, a, blocks)

    def compose(self, g, f):
        if tuple(f.tgt) != tuple(g.src):
            raise TypeMismatch("block composition type mismatch")
        blocks = []
        for k in range(len(g.tgt)):
            row = []
            for i in range(len(f.src)):
                acc = self.base.zero(f.src[i], g.tgt[k])
                for j in range(len(f.tgt)):
                    acc = self.add_base(acc, self.base.compose(g.blocks[k][j], f.blocks[j][i]))
                row.append(acc)
            blocks.append(tuple(row))
        return BlockMorphism(f.src, g.tgt, tuple(blocks))

    def tensor(self, f, g):
        src = self.tensor_obj(f.src, g.src)
        tgt = self.tensor_obj(f.tgt, g.tgt)
        blocks = tuple(
            tuple(self.base.tensor(f.blocks[k][i], g.blocks[l][j]) for i in range(len(f.src)) for j in range(len(g.src)))
            for k in range(len(f.tgt))
            for l in range(len(g.tgt))
        )
        return BlockMorphism(src, tgt, blocks)

    def swap(self, a, b):
        src = self.tensor_obj(a, b)
        tgt = self.tensor_obj(b, a)
        blocks = []
        for q in range(len(b)):
            for p in range(len(a)):
                row = []
                for i in range(len(a)):
                    for j in range(len(b)):
                        if (i, j) == (p, q):
                            row.append(self.base.swap(a[i], b[j]))
                        else:
                            row.append(self.base.zero(self.base.tensor_obj(a[i], b[j]), self.base.tensor_obj(b[q], a[p])))
                blocks.append(tuple(row))
        return BlockMorphism(src, tgt, tuple(blocks))

    def dagger(self, f):
        blocks = tuple(
            tuple(self.base.dagger(f.blocks[j][i]) for j in range(len(f.tgt))) for i in range(len(f.src))
        )
        return BlockMorphism(f.tgt, f.src, blocks)

    def discard(self, a):
        return BlockMorphism(a, self.unit(), (tuple(self.base.discard(x) for x in a),))

    def zero(self, a, b):
        return BlockMorphism(a, b, tuple(tuple(self.base.zero(x, y) for x in a) for y in b))

    def add(self, f, g):
        return BlockMorphism(
            f.src,
            f.tgt,
            tuple(tuple(self.add_base(x, y) for x, y in zip(rf, rg)) for rf, rg in zip(f.blocks, g.blocks)),
        )

    def coprojection(self, objs: tuple, i: int):
        """κ_i : (A_i) -> (A_1, ..., A_n)."""
        blocks = tuple(
            (self.base.identity(objs[i]) if j == i else self.base.zero(objs[i], objs[j]),) for j in range(len(objs))
        )
        return BlockMorphism((objs[i],), tuple(objs), blocks)

    def projection(self, objs: tuple, i: int):
        """π_i : (A_1, ..., A_n) -> (A_i)."""
        row = tuple(self.base.identity(objs[i]) if j == i else self.base.zero(objs[j], objs[i]) for j in range(len(objs)))
        return BlockMorphism(tuple(objs), (objs[i],), (row,))

    def embed(self, f):
        """Singleton-list embedding of a base morphism."""
        return BlockMorphism((self.base.src(f),), (self.base.tgt(f),), ((f,),))

    def sample_morphism(self, rng, a, b):
        return BlockMorphism(a, b, tuple(tuple(self.base.sample_morphism(rng, x, y) for x in a) for y in b))

    def equal(self, f, g, tol=None):
        if tuple(f.src) != tuple(g.src) or tuple(f.tgt) != tuple(g.tgt):
            return False
        return all(self.base.equal(x, y, tol) for rf, rg in zip(f.blocks, g.blocks) for x, y in zip(rf, rg))

    def deviation(self, f, g):
        if tuple(f.src) != tuple(g.src) or tuple(f.tgt) != tuple(g.tgt):
            return math.inf
        return max(
            (self.base.deviation(x, y) for rf, rg in zip(f.blocks, g.blocks) for x, y in zip(rf, rg)), default=0.0
        )

    def to_json(self, f):
        return {
            "src": list(f.src),
            "tgt": list(f.tgt),
            "blocks": [[self.base.to_json(x) for x in row] for row in f.blocks],
        }


def biproduct_complete(base: Category) -> BiproductCompletion:
    return BiproductCompletion(base)


def flatten_blocks(f: BlockMorphism) -> MatMorphism:
    """Assemble a block morphism over a matrix base into one big matrix."""
    rows = [np.concatenate([b.data for b in row], axis=1) for row in f.blocks]
    backend = f.blocks[0][0].backend
    return MatMorphism(backend, np.concatenate(rows, axis=0))


# ---------------------------------------------------------------------------
# bitmask relations for closure generation
# ---------------------------------------------------------------------------


def _bits(x: int) -> Iterable[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


@dataclass(frozen=True)
class Rel:
    """A relation dom -> cod stored as one output bitmask per input."""

    dom: int
    cod: int
    images: tuple

    @staticmethod
    def from_pairs(dom: int, cod: int, pairs: Iterable[tuple[int, int]]) -> "Rel":
        im = [0] * dom
        for i, j in pairs:
            im[i] |= 1 << j
        return Rel(dom, cod, tuple(im))

    @staticmethod
    def from_matrix(r: MatMorphism) -> "Rel":
        return Rel.from_pairs(r.cols, r.rows, relation_pairs(r))

    def pairs(self) -> list[tuple[int, int]]:
        return sorted((i, j) for i, m in enumerate(self.images) for j in _bits(m))

    def to_matrix(self) -> MatMorphism:
        return relation_from_pairs(self.dom, self.cod, self.pairs())

    def compose(self, r: "Rel") -> "Rel":
        """``self ∘ r``."""
        if r.cod != self.dom:
            raise TypeMismatch("relation composition type mismatch")
        out = []
        mine = self.images
        for m in r.images:
            acc = 0
            for b in _bits(m):
                acc |= mine[b]
            out.append(acc)
        return Rel(r.dom, self.cod, tuple(out))

    def tensor(self, s: "Rel") -> "Rel":
        out = []
        for m1 in self.images:
            outs1 = list(_bits(m1))
            for m2 in s.images:
                acc = 0
                for b1 in outs1:
                    acc |= m2 << (b1 * s.cod)
                out.append(acc)
        return Rel(self.dom * s.dom, self.cod * s.cod, tuple(out))

    def converse(self) -> "Rel":
        im = [0] * self.cod
        for i, m in enumerate(self.images):
            for j in _bits(m):
                im[j] |= 1 << i
        return Rel(self.cod, self.dom, tuple(im))

    def is_zero(self) -> bool:
        return not any(self.images)

    def cardinality(self) -> int:
        return sum(bin(m).count("1") for m in self.images)

    def image_set(self) -> int:
        acc = 0
        for m in self.images:
            acc |= m
        return acc

    @staticmethod
    def identity(n: int) -> "Rel":
        return Rel(n, n, tuple(1 << i for i in range(n)))

    @staticmethod
    def swap(a: int, b: int) -> "Rel":
        return Rel(a * b, a * b, tuple(1 << j for j in swap_permutation(a, b)))

    @staticmethod
    def discard(n: int) -> "Rel":
        return Rel(n, 1, tuple(1 for _ in range(n)))


# ---------------------------------------------------------------------------
# closure generation
# ---------------------------------------------------------------------------


@dataclass
class ClosureSpec:
    generators: list
    base_size: int = 4
    object_bound: int = 1
    budget: int = 100_000
    work_limit: int | None = None
    compose: bool = True
    tensor: bool = True
    dagger: bool = True
    swaps: bool = True
    identities: bool = True

    def __post_init__(self):
        for g in self.generators:
            if self._power(g.dom) is None or self._power(g.cod) is None:
                raise ValueError("generator is not typed over powers of the generator object")

    def _power(self, size: int) -> int | None:
        n, s = 0, 1
        while s < size:
            s *= self.base_size
            n += 1
        return n if s == size else None


@dataclass
class ClosureResult:
    base_size: int
    object_bound: int
    homs: dict
    saturated: bool
    rounds: int
    elapsed_ms: float

    def hom(self, a: int, b: int) -> set:
        """Generated morphisms IV^a -> IV^b."""
        return self.homs.get((a, b), set())

    def states(self, n: int) -> set:
        return self.hom(0, n)

    def effects(self, n: int) -> set:
        return self.hom(n, 0)

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.homs.values())

    def to_json(self) -> dict:
        objs = list(range(self.object_bound + 1))
        return {
            "objects": [self.base_size**n for n in objs],
            "counts": {f"{a}->{b}": len(self.hom(a, b)) for a in objs for b in objs},
            "saturated": self.saturated,
        }


def closure_generate(spec: ClosureSpec) -> ClosureResult:
    """Close the generators under the enabled operations, breadth first.

    Each round applies converse to the new morphisms and composes/tensors every
    pair involving at least one new morphism; results on objects beyond the
    bound are dropped.  Stops at a fixpoint (saturated) or when either the
    budget on the number of morphisms or the work limit on candidate
    operations (default 50 x budget) is exhausted.
    """
    t0 = time.perf_counter()
    base, bound = spec.base_size, spec.object_bound
    power = {base**n: n for n in range(bound + 1)}
    homs: dict[tuple[int, int], set] = {}

    def key(r: Rel):
        return power[r.dom], power[r.cod]

    def admissible(r: Rel) -> bool:
        return r.dom in power and r.cod in power

    seed: list[Rel] = [g for g in spec.generators if admissible(g)]
    if spec.identities:
        seed += [Rel.identity(base**n) for n in range(bound + 1)]
    if spec.swaps:
        seed += [Rel.swap(base**a, base**b) for a in range(bound + 1) for b in range(bound + 1 - a)]

    total = 0
    new: list[Rel] = []
    for r in seed:
        s = homs.setdefault(key(r), set())
        if r not in s:
            s.add(r)
            new.append(r)
            total += 1

    saturated = True
    rounds = 0
    by_dom: dict[int, list[Rel]] = {}
    by_cod: dict[int, list[Rel]] = {}
    known: list[Rel] = []

    work = 0
    work_limit = spec.work_limit if spec.work_limit is not None else 50 * spec.budget

    def insert(r: Rel, out: list[Rel]) -> bool:
        nonlocal total, work
        work += 1
        if work > work_limit:
            return False
        if not admissible(r):
            return True
        s = homs.setdefault(key(r), set())
        if r in s:
            return True
        if total >= spec.budget:
            return False
        s.add(r)
        out.append(r)
        total += 1
        return True

    while new:
        rounds += 1
        for r in new:
            known.append(r)
            by_dom.setdefault(r.dom, []).append(r)
            by_cod.setdefault(r.cod, []).append(r)
        fresh: list[Rel] = []
        ok = True
        new_ids = {id(r) for r in new}
        for r in new:
            if spec.dagger and not insert(r.converse(), fresh):
                ok = False
                break
            if spec.compose:
                for g in list(by_dom.get(r.cod, ())):
                    if not insert(g.compose(r), fresh):
                        ok = False
                        break
                if not ok:
                    break
                for f in list(by_cod.get(r.dom, ())):
                    if id(f) in new_ids:
                        continue  # pair already produced from f's side
                    if not insert(r.compose(f), fresh):
                        ok = False
                        break
                if not ok:
                    break
            if spec.tensor:
                for s in list(known):
                    if r.dom * s.dom in power and r.cod * s.cod in power:
                        if not insert(r.tensor(s), fresh) or not insert(s.tensor(r), fresh):
                            ok = False
                            break
                if not ok:
                    break
        if not ok:
            saturated = False
            break
        new = fresh
    return ClosureResult(base, bound, homs, saturated, rounds, (time.perf_counter() - t0) * 1e3)


# ---------------------------------------------------------------------------
# Spekkens toy model
# ---------------------------------------------------------------------------

# elements of IV are 1..4 in the usual presentation; indices here are 0..3
SPEK_STATE = Rel.from_pairs(1, 4, [(0, 0), (0, 2)])  # ⋆ -> {1, 3}
SPEK_COPY = Rel.from_pairs(
    4,
    16,
    [
        (0, 0 * 4 + 0), (0, 1 * 4 + 1),  # 1 -> (1,1), (2,2)
        (1, 0 * 4 + 1), (1, 1 * 4 + 0),  # 2 -> (1,2), (2,1)
        (2, 2 * 4 + 2), (2, 3 * 4 + 3),  # 3 -> (3,3), (4,4)
        (3, 2 * 4 + 3), (3, 3 * 4 + 2),  # 4 -> (3,4), (4,3)
    ],
)


def spek_generators(mixed: bool = False) -> list[Rel]:
    gens = [SPEK_STATE, SPEK_COPY]
    gens += [Rel(4, 4, tuple(1 << p for p in perm)) for perm in itertools.permutations(range(4))]
    if mixed:
        gens.append(Rel.discard(4))
    return gens


def spek_closure(object_bound: int = 1, mixed: bool = False, budget: int = 100_000,
                 allow_large: bool = False) -> ClosureResult:
    """Spek (or MSpek with ``mixed``) restricted to IV^n, n <= object_bound."""
    if object_bound > 2 and not allow_large:
        raise ValueError("object_bound > 2 requires allow_large=True")
    spec = ClosureSpec(spek_generators(mixed), base_size=4, object_bound=object_bound, budget=budget)
    return closure_generate(spec)


def spek_pure_exclusion_witness(state: Rel, closure: ClosureResult) -> Rel | None:
    """A generated nonzero effect ``e`` with ``e ∘ state = 0``, if any."""
    n = closure.object_bound
    size = state.cod
    k = next(k for k in range(n + 1) if closure.base_size**k == size)
    for e in sorted(closure.effects(k), key=lambda r: r.images):
        if e.is_zero():
            continue
        if e.compose(state).is_zero():
            return e
    return None


def brute_force_spek_states() -> set:
    """Independent count of Spek states of IV.

    Closes the set of subsets of IV that contain {1,3} under the generated
    permutations, converse-composites s ∘ t† ∘ u of known states, and nothing
    else; returns the nonzero states as bitmasks.
    """
    perms = list(itertools.permutations(range(4)))
    states = {0b0101}
    changed = True
    while changed:
        changed = False
        for s in list(states):
            for p in perms:
                t = 0
                for b in _bits(s):
                    t |= 1 << p[b]
                if t not in states:
                    states.add(t)
                    changed = True
        # s ∘ (t† ∘ u) is s when t and u overlap, empty otherwise
    return {s for s in states if s}
