"""Dagger kernels and the orthomodular lattice of kernels on an object.

Three concrete routes share one interface:

* float matrices: kernels are isometries from a rank-revealing SVD;
* exact rational / Gaussian-rational matrices: kernels are self-adjoint
  idempotents (no square roots are available);
* relations: kernels are subset inclusions.

Kernels are always compared through their projections ``k ∘ k†``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .backends import MatMorphism, matmul
from .catcore import LawReport, LawFailure
from .scalars import BackendError, GaussRat, ScalarBackend, get_backend


# ---------------------------------------------------------------------------
# numerical rank
# ---------------------------------------------------------------------------


@dataclass
class RankDecision:
    rank: int
    note: str = ""


def numerical_rank(singular_values: np.ndarray, tol: float, scale: float = 0.0) -> RankDecision:
    """Count singular values above ``tol * max(s_max, scale)``.

    ``scale`` is a lower bound for the magnitude the matrix is measured
    against; composites of isometries pass 1 so that rounding noise is rank 0.

    When some value sits within a factor 10 of the cut, the cut moves to the
    largest relative gap of the spectrum and the decision is annotated.
    """
    s = np.sort(np.abs(np.asarray(singular_values, dtype=float)))[::-1]
    if s.size == 0 or s[0] == 0.0:
        return RankDecision(0)
    cut = tol * max(s[0], scale)
    rank = int(np.sum(s > cut))
    ambiguous = np.any((s > cut / 10) & (s < cut * 10))
    if not ambiguous:
        return RankDecision(rank)
    ext = np.append(s, 0.0)
    ratios = ext[:-1] / np.maximum(ext[1:], np.finfo(float).tiny)
    k = int(np.argmax(ratios)) + 1
    return RankDecision(k, f"rank tie near tolerance resolved by largest gap: {rank} -> {k}")


# ---------------------------------------------------------------------------
# exact elimination
# ---------------------------------------------------------------------------


def _field_div(a, b):
    return a / b


def rref(backend: ScalarBackend, data: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over Q or Q[i], with pivot columns."""
    m = data.copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    zero = backend.zero
    for c in range(cols):
        p = next((i for i in range(r, rows) if m[i, c] != zero), None)
        if p is None:
            continue
        if p != r:
            m[[r, p]] = m[[p, r]]
        inv = 1 / m[r, c] if not isinstance(m[r, c], GaussRat) else m[r, c].inverse()
        m[r] = m[r] * inv
        for i in range(rows):
            if i != r and m[i, c] != zero:
                m[i] = m[i] - m[i, c] * m[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def exact_nullspace(backend: ScalarBackend, data: np.ndarray) -> np.ndarray:
    """Columns spanning {x | data x = 0}, exactly."""
    rows, cols = data.shape
    if rows == 0:
        return backend.eye(cols)
    red, pivots = rref(backend, data)
    free = [c for c in range(cols) if c not in pivots]
    basis = backend.zeros(cols, len(free))
    for k, fcol in enumerate(free):
        basis[fcol, k] = backend.one
        for i, pc in enumerate(pivots):
            basis[pc, k] = -red[i, fcol]
    return basis


def exact_rank(backend: ScalarBackend, data: np.ndarray) -> int:
    if data.size == 0:
        return 0
    return len(rref(backend, data)[1])


def exact_inverse(backend: ScalarBackend, data: np.ndarray) -> np.ndarray:
    n = data.shape[0]
    aug = np.concatenate([data, backend.eye(n)], axis=1)
    red, pivots = rref(backend, aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return red[:, n:]


def exact_projection_onto(backend: ScalarBackend, basis: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the column span: B (B†B)^{-1} B†."""
    n = basis.shape[0]
    if basis.shape[1] == 0:
        return backend.zeros(n, n)
    bd = backend.conj_array(basis).T
    gram = matmul(backend, bd, basis)
    return matmul(backend, matmul(backend, basis, exact_inverse(backend, gram)), bd)


# ---------------------------------------------------------------------------
# kernel representation
# ---------------------------------------------------------------------------


def _route(backend: ScalarBackend) -> str:
    if backend.name == "bool":
        return "rel"
    if backend.name in ("float_complex", "float_real"):
        return "float"
    if backend.name in ("rat", "gauss_rat"):
        return "exact"
    raise BackendError(f"no dagger kernels on backend {backend.name}")


@dataclass(frozen=True, eq=False)
class KernelRep:
    """A dagger kernel into ``ambient``.

    ``isometry`` (ambient x rank) is present on the float and relation routes;
    ``projection`` is always present.
    """

    ambient: int
    backend: ScalarBackend
    projection: np.ndarray
    isometry: np.ndarray | None = None
    notes: tuple = ()

    @property
    def route(self) -> str:
        return _route(self.backend)

    @property
    def rank(self) -> int:
        if self.isometry is not None:
            return self.isometry.shape[1]
        tr = sum((self.projection[i, i] for i in range(self.ambient)), self.backend.zero)
        tr = tr.re if isinstance(tr, GaussRat) else tr
        if Fraction(tr).denominator != 1:
            raise ValueError("projection trace is not an integer")
        return int(tr)

    def as_morphism(self) -> MatMorphism:
        """The kernel as a morphism (isometry if available, else projection)."""
        if self.isometry is not None:
            return MatMorphism(self.backend, self.isometry)
        return MatMorphism(self.backend, self.projection)

    def projector(self) -> MatMorphism:
        return MatMorphism(self.backend, self.projection)

    def to_json(self) -> dict:
        from .scalars import payload_to_json

        b = self.backend.name
        return {
            "ambient": self.ambient,
            "projection": [[payload_to_json(b, x) for x in row] for row in self.projection.tolist()],
        }


def kernel_from_isometry(backend: ScalarBackend, iso: np.ndarray, notes: tuple = ()) -> KernelRep:
    n = iso.shape[0]
    if backend.name == "bool":
        proj = (iso.astype(np.int64) @ iso.T.astype(np.int64)) > 0
        if iso.shape[1] == 0:
            proj = np.zeros((n, n), dtype=bool)
    else:
        proj = iso @ backend.conj_array(iso).T if iso.shape[1] else backend.zeros(n, n)
    return KernelRep(n, backend, proj, iso, notes)


def kernel_from_projection(backend: ScalarBackend, proj: np.ndarray) -> KernelRep:
    return KernelRep(proj.shape[0], backend, proj)


def subset_kernel(n: int, members) -> KernelRep:
    """The inclusion of a subset into an n-element set."""
    members = sorted(set(members))
    b = get_backend("bool")
    iso = np.zeros((n, len(members)), dtype=bool)
    for k, i in enumerate(members):
        iso[i, k] = True
    return kernel_from_isometry(b, iso)


def kernel_members(k: KernelRep) -> set[int]:
    """Subset picked out by a relation-route kernel."""
    if k.route != "rel":
        raise BackendError("subset view only exists for relation kernels")
    return {int(i) for i in np.nonzero(k.projection.diagonal())[0]}


def _float_null_isometry(backend: ScalarBackend, data: np.ndarray, tol: float, scale: float) -> tuple[np.ndarray, str]:
    rows, cols = data.shape
    if rows == 0 or cols == 0:
        return np.eye(cols, dtype=backend.dtype), ""
    _, s, vh = np.linalg.svd(data)
    dec = numerical_rank(s, tol, scale)
    null = vh[dec.rank:].conj().T
    return np.ascontiguousarray(null.astype(backend.dtype)), dec.note


def kernel(f: MatMorphism, tol: float | None = None, scale: float = 0.0) -> KernelRep:
    """Dagger kernel of ``f : A -> B`` as a kernel into A.

    On the float route singular values below ``tol * max(s_max, scale)`` count
    as zero.
    """
    b = f.backend
    route = _route(b)
    if route == "rel":
        members = [j for j in range(f.cols) if not f.data[:, j].any()]
        return subset_kernel(f.cols, members)
    if route == "float":
        iso, note = _float_null_isometry(b, f.data, b.tol if tol is None else tol, scale)
        return kernel_from_isometry(b, iso, (note,) if note else ())
    basis = exact_nullspace(b, f.data)
    return kernel_from_projection(b, exact_projection_onto(b, basis))


def cokernel(f: MatMorphism, tol: float | None = None, scale: float = 0.0) -> MatMorphism:
    """coker(f) = ker(f†)†; on the exact route the projection onto ker(f†)."""
    k = kernel(f.dagger(), tol, scale)
    return k.as_morphism().dagger()


def image(f: MatMorphism, tol: float | None = None, scale: float = 0.0) -> KernelRep:
    """im(f) = ker(coker(f))."""
    return kernel(cokernel(f, tol, scale), tol, 1.0)


def coimage(f: MatMorphism, tol: float | None = None) -> MatMorphism:
    """coim(f) = coker(ker(f))."""
    return cokernel(kernel(f, tol).as_morphism(), tol, 1.0)


def complement(k: KernelRep, tol: float | None = None) -> KernelRep:
    """k⊥ = coker(k)†; on the exact route id - p."""
    if k.isometry is None:
        b = k.backend
        return kernel_from_projection(b, b.eye(k.ambient) - k.projection)
    return kernel(k.as_morphism().dagger(), tol, 1.0)


def _check_ambient(k: KernelRep, l: KernelRep):
    if k.ambient != l.ambient or k.backend.name != l.backend.name:
        raise BackendError("kernels live on different objects")


def meet(k: KernelRep, l: KernelRep, tol: float | None = None) -> KernelRep:
    """k ∧ l = k ∘ ker(coker(l) ∘ k); exact route: kernel of (1-p; 1-q)."""
    _check_ambient(k, l)
    b = k.backend
    if k.isometry is None:
        eye = b.eye(k.ambient)
        stacked = np.concatenate([eye - k.projection, eye - l.projection], axis=0)
        return kernel(MatMorphism(b, stacked), tol)
    kk = k.as_morphism()
    inner = kernel(cokernel(l.as_morphism(), tol, 1.0).compose(kk), tol, 1.0)
    iso = kk.compose(inner.as_morphism()).data
    return kernel_from_isometry(b, iso, k.notes + l.notes + inner.notes)


def join(k: KernelRep, l: KernelRep, tol: float | None = None) -> KernelRep:
    """k ∨ l = (k⊥ ∧ l⊥)⊥."""
    return complement(meet(complement(k, tol), complement(l, tol), tol), tol)


def top(backend: ScalarBackend, n: int) -> KernelRep:
    if _route(backend) == "exact":
        return kernel_from_projection(backend, backend.eye(n))
    return kernel_from_isometry(backend, backend.eye(n))


def bottom(backend: ScalarBackend, n: int) -> KernelRep:
    if _route(backend) == "exact":
        return kernel_from_projection(backend, backend.zeros(n, n))
    return kernel_from_isometry(backend, backend.zeros(n, 0))


def kernel_equal(k: KernelRep, l: KernelRep, tol: float | None = None) -> bool:
    _check_ambient(k, l)
    return k.backend.arrays_equal(k.projection, l.projection, tol)


def leq(k: KernelRep, l: KernelRep, tol: float | None = None) -> bool:
    """k ≤ l iff l l† k = k, i.e. q p = p."""
    _check_ambient(k, l)
    b = k.backend
    if b.name == "bool":
        return bool(np.all(~k.projection.diagonal() | l.projection.diagonal()))
    return b.arrays_equal(matmul(b, l.projection, k.projection), k.projection, tol)


def is_isometry(k: MatMorphism, tol: float | None = None) -> bool:
    b = k.backend
    gram = k.dagger().compose(k)
    return b.arrays_equal(gram.data, b.eye(k.cols), tol)


def atom_below(k: KernelRep, tol: float | None = None) -> KernelRep | None:
    """A rank-1 kernel below a nonzero k (kernel states are the atoms)."""
    b = k.backend
    if k.rank == 0:
        return None
    if k.isometry is not None:
        return kernel_from_isometry(b, k.isometry[:, :1].copy())
    for j in range(k.ambient):
        col = k.projection[:, j : j + 1]
        if any(x != b.zero for x in col.flat):
            return kernel_from_projection(b, exact_projection_onto(b, col))
    return None


# ---------------------------------------------------------------------------
# sampling kernels
# ---------------------------------------------------------------------------


class KernelSpace:
    """Samples kernels on a fixed ambient object of one route."""

    def __init__(self, backend: ScalarBackend | str, n: int):
        self.backend = get_backend(backend) if isinstance(backend, str) else backend
        self.n = n
        self.route = _route(self.backend)

    def __repr__(self):
        return f"KernelSpace({self.backend.name}, {self.n})"

    def _random_vectors(self, rng, k: int) -> np.ndarray:
        b = self.backend
        if self.route == "exact":
            out = b.zeros(self.n, k)
            for idx in np.ndindex(self.n, k):
                out[idx] = b.random(rng)
            return out
        return b.random_array(rng, self.n, k)

    def kernel_of_span(self, vecs: np.ndarray) -> KernelRep:
        """The kernel of a morphism whose nullspace is the span of ``vecs``."""
        b = self.backend
        if self.route == "rel":
            members = {int(i) for i in np.nonzero(vecs.any(axis=1))[0]}
            f = np.zeros((1, self.n), dtype=bool)
            for j in range(self.n):
                if j not in members:
                    f[0, j] = True
            return kernel(MatMorphism(b, f))
        if self.route == "float":
            if vecs.shape[1] == 0:
                return kernel(MatMorphism(b, b.eye(self.n)))
            q, _ = np.linalg.qr(vecs)
            proj = q @ q.conj().T
            return kernel(MatMorphism(b, (b.eye(self.n) - proj).astype(b.dtype)))
        proj = exact_projection_onto(b, _independent_columns(b, vecs))
        return kernel(MatMorphism(b, b.eye(self.n) - proj))

    def sample(self, rng, rank: int | None = None) -> KernelRep:
        if rank is None:
            rank = int(rng.integers(0, self.n + 1))
        if self.route == "rel":
            members = rng.choice(self.n, size=rank, replace=False)
            v = np.zeros((self.n, 1), dtype=bool)
            v[members, 0] = True
            return self.kernel_of_span(v) if rank else bottom(self.backend, self.n)
        return self.kernel_of_span(self._random_vectors(rng, rank))

    def sample_pair(self, rng) -> tuple[KernelRep, KernelRep, str]:
        """Independent, nested or overlapping pairs, in rotation."""
        mode = ("independent", "nested", "overlap")[int(rng.integers(3))]
        if mode == "independent":
            return self.sample(rng), self.sample(rng), mode
        if mode == "nested":
            k, l = self.sample_nested(rng)
            return k, l, mode
        r = int(rng.integers(0, self.n + 1))
        common = self._random_vectors(rng, r) if self.route != "rel" else None
        if self.route == "rel":
            base = set(rng.choice(self.n, size=r, replace=False).tolist())
            extra1 = set(rng.choice(self.n, size=int(rng.integers(0, self.n + 1)), replace=False).tolist())
            extra2 = set(rng.choice(self.n, size=int(rng.integers(0, self.n + 1)), replace=False).tolist())
            return subset_kernel(self.n, base | extra1), subset_kernel(self.n, base | extra2), mode
        e1 = self._random_vectors(rng, int(rng.integers(0, self.n - r + 1)))
        e2 = self._random_vectors(rng, int(rng.integers(0, self.n - r + 1)))
        k = self.kernel_of_span(np.concatenate([common, e1], axis=1))
        l = self.kernel_of_span(np.concatenate([common, e2], axis=1))
        return k, l, mode

    def sample_nested(self, rng) -> tuple[KernelRep, KernelRep]:
        """k ≤ l, with k obtained by composing l with a kernel on its domain."""
        l = self.sample(rng)
        if self.route == "exact":
            # restrict a random span to l by projecting it
            v = self._random_vectors(rng, int(rng.integers(0, l.rank + 1)))
            v = matmul(self.backend, l.projection, v)
            return self.kernel_of_span(v), l
        sub = KernelSpace(self.backend, l.rank).sample(rng) if l.rank else bottom(self.backend, 0)
        iso = matmul(self.backend, l.isometry, sub.isometry) if l.rank else self.backend.zeros(self.n, 0)
        if self.backend.name == "bool":
            iso = iso.astype(bool)
        return kernel_from_isometry(self.backend, iso), l

    def sample_atom(self, rng) -> KernelRep:
        return self.sample(rng, rank=1)


def _independent_columns(backend: ScalarBackend, vecs: np.ndarray) -> np.ndarray:
    if vecs.shape[1] == 0:
        return vecs
    _, pivots = rref(backend, vecs)
    return vecs[:, pivots]


# ---------------------------------------------------------------------------
# lattice audits
# ---------------------------------------------------------------------------


class _Rec:
    def __init__(self, report: LawReport, max_witnesses: int = 5):
        self.report = report
        self.max = max_witnesses

    def check(self, law: str, ok: bool, *kernels: KernelRep):
        if not ok:
            wit = [k.to_json() for k in kernels] if len(self.report.failures) < self.max else None
            self.report.failures.append(LawFailure(law, wit, None, None, float("nan")))
        return ok


def _run(name: str, space: KernelSpace, samples: int, seed: int, body: Callable) -> LawReport:
    report = LawReport(f"{name}[{space.backend.name},{space.n}]")
    rec = _Rec(report)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    for _ in range(samples):
        body(rng, rec)
        report.samples += 1
    report.elapsed_ms = (time.perf_counter() - t0) * 1e3
    return report


def check_orthomodular(space: KernelSpace, samples: int = 200, tol: float | None = None, seed: int = 42) -> LawReport:
    """Orthomodular law on nested pairs plus the ortholattice axioms."""
    b = space.backend
    one, zero = top(b, space.n), bottom(b, space.n)
    eq = lambda x, y: kernel_equal(x, y, tol)  # noqa: E731

    def body(rng, rec):
        a, c = space.sample_nested(rng)
        rec.check("nested_sample", leq(a, c, tol), a, c)
        rec.check("orthomodular", eq(c, join(a, meet(c, complement(a, tol), tol), tol)), a, c)
        x, y, _ = space.sample_pair(rng)
        z = space.sample(rng)
        xc = complement(x, tol)
        rec.check("join_complement_top", eq(join(x, xc, tol), one), x)
        rec.check("meet_complement_bottom", eq(meet(x, xc, tol), zero), x)
        rec.check("double_complement", eq(complement(xc, tol), x), x)
        rec.check("meet_commutative", eq(meet(x, y, tol), meet(y, x, tol)), x, y)
        rec.check("join_commutative", eq(join(x, y, tol), join(y, x, tol)), x, y)
        rec.check("meet_associative", eq(meet(meet(x, y, tol), z, tol), meet(x, meet(y, z, tol), tol)), x, y, z)
        rec.check("absorption", eq(meet(x, join(x, y, tol), tol), x), x, y)
        rec.check("absorption_dual", eq(join(x, meet(x, y, tol), tol), x), x, y)
        rec.check("meet_idempotent", eq(meet(x, x, tol), x), x)
        rec.check("meet_top", eq(meet(x, one, tol), x), x)
        rec.check("order_via_meet", leq(x, y, tol) == eq(meet(x, y, tol), x), x, y)
        m = meet(x, y, tol)
        rec.check("meet_is_lower_bound", leq(m, x, tol) and leq(m, y, tol), x, y)
        j = join(x, y, tol)
        rec.check("join_is_upper_bound", leq(x, j, tol) and leq(y, j, tol), x, y)
        rec.check("complement_antitone", (not leq(x, y, tol)) or leq(complement(y, tol), xc, tol), x, y)
        if x.rank:
            at = atom_below(x, tol)
            rec.check("atomic", at is not None and at.rank == 1 and leq(at, x, tol), x)

    return _run("orthomodular", space, samples, seed, body)


def check_image_meet_lemma(space: KernelSpace, samples: int = 200, tol: float | None = None, seed: int = 42) -> LawReport:
    """im(k ∘ k† ∘ l) = k ∧ (l ∨ k⊥)."""
    b = space.backend

    def body(rng, rec):
        k, l, _ = space.sample_pair(rng)
        pk = MatMorphism(b, k.projection)
        lhs = image(pk.compose(l.as_morphism()), tol, 1.0)
        rhs = meet(k, join(l, complement(k, tol), tol), tol)
        rec.check("image_meet", kernel_equal(lhs, rhs, tol), k, l)

    return _run("image_meet_lemma", space, samples, seed, body)


def check_covering_law(space: KernelSpace, samples: int = 200, tol: float | None = None, seed: int = 42) -> LawReport:
    """rank(b ∧ (a ∨ b⊥)) ∈ {0, 1} for atoms a and kernels b."""

    def body(rng, rec):
        a = space.sample_atom(rng)
        bb = space.sample(rng) if rng.integers(2) else space.sample_pair(rng)[1]
        r = meet(bb, join(a, complement(bb, tol), tol), tol)
        rec.check("covering", r.rank in (0, 1), a, bb)
        if leq(a, bb, tol):
            rec.check("covering_below", kernel_equal(r, a, tol), a, bb)

    return _run("covering_law", space, samples, seed, body)


def check_atomicity(space: KernelSpace, samples: int = 200, tol: float | None = None, seed: int = 42) -> LawReport:
    def body(rng, rec):
        k = space.sample(rng)
        if k.rank == 0:
            return
        at = atom_below(k, tol)
        rec.check("atom_exists", at is not None and at.rank == 1 and leq(at, k, tol), k)

    return _run("atomicity", space, samples, seed, body)


def check_kernel_factorisation(f: MatMorphism, g: MatMorphism, tol: float | None = None) -> tuple[bool, float]:
    """f ∘ ker(f) = 0 and, when f ∘ g = 0, g = ker(f) ∘ h for h = ker(f)† ∘ g.

    Returns (ok, residual).  Float and relation routes only.
    """
    b = f.backend
    k = kernel(f, tol)
    km = k.as_morphism()
    fk = f.compose(km)
    ok = b.arrays_equal(fk.data, b.zeros(f.rows, km.cols), tol)
    fg = f.compose(g)
    if not b.arrays_equal(fg.data, b.zeros(f.rows, g.cols), tol):
        return ok, 0.0
    h = km.dagger().compose(g)
    back = km.compose(h)
    residual = b.deviation(back.data, g.data)
    return ok and b.arrays_equal(back.data, g.data, tol), residual
