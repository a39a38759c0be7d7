"""Global-phase quotients of matrix categories, phased coproducts and the GP
reconstruction.

A morphism in the quotient is a matrix up to a unit-modulus scalar.  The
canonical representative has its first clearly nonzero entry (row-major
scan) real and positive; "clearly nonzero" means above ``CANON_REL`` times
the largest entry, so rounding noise in a zero entry cannot move the anchor.

GP objects A ∔ I are realised as (n+1)-dimensional carriers with the I-block
last.  A GP morphism is block-diagonal diag(f, c); dividing by the I-block
entry c removes the phase, which is how GP inverts the quotient.
"""
from __future__ import annotations

import cmath
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .backends import MatMorphism
from .catcore import LawFailure, LawReport, TypeMismatch
from .scalars import BackendError, GaussRat, ScalarBackend, get_backend, payload_from_json, payload_to_json

CANON_REL = 1e-6
PHASE_GROUPS = ("circle", "gauss_units", "trivial")


class PhaseMismatch(ValueError):
    """Two morphisms do not agree on a coprojection up to phase."""


@dataclass(frozen=True)
class PhaseGroup:
    """Unit scalars identified by the quotient: the circle (float ℂ), the
    norm-one Gaussian rationals, or only 1."""

    kind: str = "circle"

    def __post_init__(self):
        if self.kind not in PHASE_GROUPS:
            raise BackendError(f"unknown phase group {self.kind!r}")

    def contains(self, u, tol: float = 1e-9) -> bool:
        if self.kind == "trivial":
            return u == 1
        if self.kind == "gauss_units":
            return isinstance(u, GaussRat) and u.norm() == 1
        return abs(abs(complex(u)) - 1.0) <= tol

    def sample(self, rng: np.random.Generator):
        if self.kind == "trivial":
            return 1
        if self.kind == "gauss_units":
            # (a + bi)^2 / (a^2 + b^2) has norm one
            a, b = int(rng.integers(-4, 5)), int(rng.integers(1, 5))
            z = GaussRat(a, b)
            return z * z * GaussRat(Fraction(1, a * a + b * b))
        return cmath.exp(1j * rng.uniform(0, 2 * np.pi))


def _group_for(backend: ScalarBackend) -> PhaseGroup:
    if backend.name == "float_complex":
        return PhaseGroup("circle")
    if backend.name == "gauss_rat":
        return PhaseGroup("gauss_units")
    return PhaseGroup("trivial")


# ---------------------------------------------------------------------------
# quotient morphisms
# ---------------------------------------------------------------------------


def _anchor(data: np.ndarray, rel: float = CANON_REL):
    flat = np.asarray(data, dtype=complex).ravel()
    if flat.size == 0:
        return None
    big = float(np.max(np.abs(flat)))
    if big == 0.0:
        return None
    idx = int(np.argmax(np.abs(flat) > rel * big))
    return idx, flat[idx]


def canonical_phase(data: np.ndarray, rel: float = CANON_REL) -> complex:
    """The unit u such that u·data has its anchor entry real positive."""
    a = _anchor(data, rel)
    if a is None:
        return 1.0 + 0j
    x = a[1]
    return np.conj(x) / abs(x)


@dataclass(frozen=True, eq=False)
class QuotMorphism:
    rep: MatMorphism
    group: PhaseGroup = PhaseGroup("circle")
    canonical: bool = False

    @property
    def rows(self) -> int:
        return self.rep.rows

    @property
    def cols(self) -> int:
        return self.rep.cols

    def equal(self, other: "QuotMorphism", tol: float | None = None) -> bool:
        return quot_equal(self, other, tol)

    def to_json(self) -> dict:
        b = self.rep.backend.name
        return {
            "representative": [[payload_to_json(b, x) for x in row] for row in self.rep.data.tolist()],
            "backend": b,
            "phase_group": self.group.kind,
            "canonical": self.canonical,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "QuotMorphism":
        backend = get_backend(obj.get("backend", "float_complex"))
        rows = obj["representative"]
        data = backend.array([[payload_from_json(backend.name, x) for x in r] for r in rows])
        return cls(MatMorphism(backend, data), PhaseGroup(obj["phase_group"]), bool(obj["canonical"]))


def canonicalize(f: MatMorphism, group: PhaseGroup | None = None) -> QuotMorphism:
    """The canonical representative of [f]."""
    b = f.backend
    group = group or _group_for(b)
    if group.kind == "trivial":
        return QuotMorphism(f, group, True)
    if b.name != "float_complex":
        raise BackendError("canonical representatives need the float complex backend")
    u = canonical_phase(f.data)
    return QuotMorphism(MatMorphism(b, f.data * u), group, True)


def quotient(f: MatMorphism, group: PhaseGroup | None = None) -> QuotMorphism:
    """[f] without normalisation."""
    return QuotMorphism(f, group or _group_for(f.backend), False)


def relating_phase(f: MatMorphism, g: MatMorphism, group: PhaseGroup | None = None, tol: float | None = None):
    """u in the phase group with g = u·f, or None."""
    b = f.backend
    group = group or _group_for(b)
    if f.data.shape != g.data.shape:
        return None
    tol = b.tol if tol is None else tol
    if group.kind == "trivial":
        return 1 if f.equal(g, tol) else None
    a = _anchor(f.data)
    if a is None:
        return 1 if g.equal(f, tol) else None
    idx, x = a
    if b.exact:
        y = g.data.ravel()[idx]
        u = y * GaussRat(1) / x if not isinstance(x, GaussRat) else y / x
        ok = group.contains(u) and MatMorphism(b, f.data * u).equal(g)
        return u if ok else None
    y = complex(g.data.ravel()[idx])
    if abs(y) == 0:
        return None
    u = y / x
    u /= abs(u)
    return u if MatMorphism(b, f.data * u).equal(g, tol) else None


def quot_equal(p: QuotMorphism, q: QuotMorphism, tol: float | None = None) -> bool:
    return relating_phase(p.rep, q.rep, p.group, tol) is not None


def quot_compose(q: QuotMorphism, p: QuotMorphism) -> QuotMorphism:
    return canonicalize(q.rep.compose(p.rep), p.group) if p.group.kind == "circle" else quotient(q.rep.compose(p.rep), p.group)


def quot_tensor(p: QuotMorphism, q: QuotMorphism) -> QuotMorphism:
    return canonicalize(p.rep.tensor(q.rep), p.group) if p.group.kind == "circle" else quotient(p.rep.tensor(q.rep), p.group)


def quot_dagger(p: QuotMorphism) -> QuotMorphism:
    return canonicalize(p.rep.dagger(), p.group) if p.group.kind == "circle" else quotient(p.rep.dagger(), p.group)


# ---------------------------------------------------------------------------
# phased coproducts
# ---------------------------------------------------------------------------


def coprojections(backend: ScalarBackend, a: int, b: int) -> tuple[MatMorphism, MatMorphism]:
    """κ_A : A -> A ∔ B and κ_B : B -> A ∔ B (as in the biproduct)."""
    ka = np.concatenate([backend.eye(a), backend.zeros(b, a)], axis=0)
    kb = np.concatenate([backend.zeros(a, b), backend.eye(b)], axis=0)
    return MatMorphism(backend, ka), MatMorphism(backend, kb)


@dataclass(frozen=True, eq=False)
class PhasedCoproductWitness:
    a: int
    b: int
    kappa_a: QuotMorphism
    kappa_b: QuotMorphism

    @property
    def carrier(self) -> int:
        return self.a + self.b

    def phase(self, u) -> MatMorphism:
        """The phase diag(1_A, u·1_B) of A ∔ B."""
        bk = self.kappa_a.rep.backend
        d = bk.eye(self.a + self.b)
        for i in range(self.a, self.a + self.b):
            d[i, i] = d[i, i] * u
        return MatMorphism(bk, d)


def phased_coproduct(backend: ScalarBackend, a: int, b: int) -> PhasedCoproductWitness:
    ka, kb = coprojections(backend, a, b)
    g = _group_for(backend)
    return PhasedCoproductWitness(a, b, quotient(ka, g), quotient(kb, g))


def phased_cotuple(f: QuotMorphism, g: QuotMorphism) -> QuotMorphism:
    """A mediating h : A ∔ B -> C with h∘κ_A = [f] and h∘κ_B = [g]."""
    if f.rows != g.rows:
        raise TypeMismatch("cotuple components need a common target")
    b = f.rep.backend
    h = MatMorphism(b, np.concatenate([f.rep.data, g.rep.data], axis=1))
    return canonicalize(h, f.group) if f.group.kind == "circle" else quotient(h, f.group)


def uniqueness_phase(h: QuotMorphism, h2: QuotMorphism, a: int, tol: float | None = None) -> tuple[MatMorphism, object]:
    """U = diag(1, u) with [h2] = [h ∘ U], given that h and h2 agree on both
    coprojections up to phase.  ``a`` is the dimension of the first summand."""
    bk = h.rep.backend
    tol = bk.tol if tol is None else tol
    n = h.cols
    if h2.cols != n or h2.rows != h.rows:
        raise TypeMismatch("mediating morphisms must share their type")
    ha, hb = MatMorphism(bk, h.rep.data[:, :a]), MatMorphism(bk, h.rep.data[:, a:])
    h2a, h2b = MatMorphism(bk, h2.rep.data[:, :a]), MatMorphism(bk, h2.rep.data[:, a:])
    lam = relating_phase(ha, h2a, h.group, tol)
    mu = relating_phase(hb, h2b, h.group, tol)
    if lam is None or mu is None:
        raise PhaseMismatch("the morphisms differ on a coprojection")
    if _anchor(ha.data) is None:
        lam = 1
    if _anchor(hb.data) is None:
        mu = lam
    u = mu / lam if not bk.exact else mu * lam.conjugate()
    witness = PhasedCoproductWitness(a, n - a, quotient(coprojections(bk, a, n - a)[0]), quotient(coprojections(bk, a, n - a)[1]))
    U = witness.phase(u)
    if not quot_equal(quotient(h.rep.compose(U), h.group), h2, tol):
        raise PhaseMismatch("no phase of the coproduct relates the two morphisms")
    return U, u


def check_phased_coproducts(samples: int = 200, seed: int = 42, max_dim: int = 4, tol: float = 1e-9) -> LawReport:
    """Existence, phase-uniqueness and the phase equation U∘κ_A = κ_A on the
    quotient of Mat_ℂ, plus orthogonality of the dagger coprojections."""
    bk = get_backend("float_complex", tol)
    group = PhaseGroup("circle")
    rng = np.random.default_rng([seed, 11])
    report = LawReport("phased_coproduct[float_complex]")
    t0 = time.perf_counter()

    def need(law, ok, inputs=()):
        if not ok and len(report.failures) < 10:
            report.failures.append(LawFailure(law, list(inputs), None, None, float("nan")))

    for _ in range(samples):
        a, b, c = (int(x) for x in rng.integers(1, max_dim + 1, size=3))
        f = quotient(MatMorphism(bk, bk.random_array(rng, c, a) * group.sample(rng)), group)
        g = quotient(MatMorphism(bk, bk.random_array(rng, c, b) * group.sample(rng)), group)
        w = phased_coproduct(bk, a, b)
        h = phased_cotuple(f, g)
        need("existence_a", quot_equal(quot_compose(h, w.kappa_a), f, tol), [f.to_json()])
        need("existence_b", quot_equal(quot_compose(h, w.kappa_b), g, tol), [g.to_json()])
        u = group.sample(rng)
        h2 = quotient(MatMorphism(bk, h.rep.compose(w.phase(u)).data * group.sample(rng)), group)
        try:
            U, got = uniqueness_phase(h, h2, a, tol)
            need("uniqueness", quot_equal(quotient(h.rep.compose(U)), h2, tol), [h.to_json(), h2.to_json()])
            need("phase_fixes_kappa_a", U.compose(w.kappa_a.rep).equal(w.kappa_a.rep, tol))
            need("phase_is_unitary", U.dagger().compose(U).equal(MatMorphism(bk, bk.eye(a + b)), tol))
        except PhaseMismatch:
            need("uniqueness", False, [h.to_json(), h2.to_json()])
        ka, kb = w.kappa_a.rep, w.kappa_b.rep
        need("coprojection_isometry", ka.dagger().compose(ka).equal(MatMorphism(bk, bk.eye(a)), tol))
        need("coprojection_orthogonal", kb.dagger().compose(ka).equal(MatMorphism(bk, bk.zeros(b, a)), tol))
        report.samples += 1
    report.elapsed_ms = (time.perf_counter() - t0) * 1e3
    return report


def check_quotient_soundness(samples: int = 200, seed: int = 42, max_dim: int = 4, tol: float = 1e-9) -> LawReport:
    """canonicalize(u·f) = canonicalize(f) for random phases u."""
    bk = get_backend("float_complex", tol)
    group = PhaseGroup("circle")
    rng = np.random.default_rng([seed, 12])
    report = LawReport("quotient_soundness[float_complex]")
    t0 = time.perf_counter()
    for _ in range(samples):
        m, n = (int(x) for x in rng.integers(1, max_dim + 1, size=2))
        f = MatMorphism(bk, bk.random_array(rng, m, n))
        u = group.sample(rng)
        p, q = canonicalize(f), canonicalize(MatMorphism(bk, f.data * u))
        if not p.rep.equal(q.rep, tol):
            report.failures.append(LawFailure("canonical_form", [f.to_json()], p.to_json(), q.to_json(),
                                              float(np.max(np.abs(p.rep.data - q.rep.data)))))
        report.samples += 1
    report.elapsed_ms = (time.perf_counter() - t0) * 1e3
    return report


# ---------------------------------------------------------------------------
# GP and GP†
# ---------------------------------------------------------------------------


def gp_object(n: int) -> int:
    """Carrier dimension of A ∔ I."""
    return n + 1


def gp_embed(f: MatMorphism) -> QuotMorphism:
    """[diag(f, 1)], a morphism A ∔ I -> B ∔ I fixing the I-block."""
    bk = f.backend
    m, n = f.rows, f.cols
    d = bk.zeros(m + 1, n + 1)
    d[:m, :n] = f.data
    d[m, n] = bk.one
    return canonicalize(MatMorphism(bk, d))


def is_gp_morphism(q: QuotMorphism, tol: float | None = None) -> bool:
    """Block-diagonal with an invertible I-block."""
    d = q.rep.data
    bk = q.rep.backend
    tol = bk.tol if tol is None else tol
    m, n = d.shape[0] - 1, d.shape[1] - 1
    scale = max(1.0, float(np.max(np.abs(d))))
    off = max(float(np.max(np.abs(d[:m, n]), initial=0.0)), float(np.max(np.abs(d[m, :n]), initial=0.0)))
    return off <= tol * scale and abs(d[m, n]) > tol * scale


def gp_extract(q: QuotMorphism, tol: float | None = None) -> MatMorphism:
    """Normalise the representative so the I-block is 1 and return the
    A -> B block; this fixes the phase exactly."""
    if not is_gp_morphism(q, tol):
        raise ValueError("not a GP morphism: off-diagonal blocks or a vanishing I-block")
    d = q.rep.data
    c = d[-1, -1]
    return MatMorphism(q.rep.backend, d[:-1, :-1] / c)


def gp_compose(q2: QuotMorphism, q1: QuotMorphism) -> QuotMorphism:
    return quot_compose(q2, q1)


def _tensor_carrier_indices(na: int, nb: int) -> list[int]:
    """Rows of (A∔I)⊗(B∔I) hit by c : (A⊗B)∔I -> (A∔I)⊗(B∔I)."""
    idx = [i * (nb + 1) + j for i in range(na) for j in range(nb)]
    idx.append(na * (nb + 1) + nb)
    return idx


def tensor_coupling(backend: ScalarBackend, na: int, nb: int) -> MatMorphism:
    """The isometry c : (A⊗B)∔I -> (A∔I)⊗(B∔I)."""
    idx = _tensor_carrier_indices(na, nb)
    c = backend.zeros((na + 1) * (nb + 1), len(idx))
    for col, row in enumerate(idx):
        c[row, col] = backend.one
    return MatMorphism(backend, c)


def gp_tensor(p: QuotMorphism, q: QuotMorphism) -> QuotMorphism:
    """c† ∘ (p ⊗ q) ∘ c."""
    bk = p.rep.backend
    ma, na = p.rows - 1, p.cols - 1
    mb, nb = q.rows - 1, q.cols - 1
    c_in, c_out = tensor_coupling(bk, na, nb), tensor_coupling(bk, ma, mb)
    return canonicalize(c_out.dagger().compose(p.rep.tensor(q.rep)).compose(c_in))


def gp_dagger(p: QuotMorphism) -> QuotMorphism:
    """GP†: the dagger of the quotient, which keeps the I-block fixed."""
    return quot_dagger(p)


def gp_identity(n: int) -> QuotMorphism:
    bk = get_backend("float_complex")
    return gp_embed(MatMorphism(bk, bk.eye(n)))


def gp_roundtrip(f: MatMorphism, rng: np.random.Generator | None = None) -> MatMorphism:
    """embed -> quotient (with a random representative) -> GP -> extract."""
    q = gp_embed(f)
    if rng is not None:
        q = quotient(MatMorphism(q.rep.backend, q.rep.data * PhaseGroup().sample(rng)))
    return gp_extract(q)


def check_gp_roundtrip(samples: int = 100, seed: int = 42, max_dim: int = 2, tol: float = 1e-9) -> LawReport:
    """Round trip, functoriality, monoidality and dagger of the GP
    reconstruction over the quotient of Mat_ℂ."""
    bk = get_backend("float_complex", tol)
    rng = np.random.default_rng([seed, 13])
    report = LawReport("gp_roundtrip[float_complex]")
    t0 = time.perf_counter()

    def need(law, lhs: MatMorphism, rhs: MatMorphism, inputs=()):
        dev = float(np.max(np.abs(lhs.data - rhs.data), initial=0.0)) if lhs.data.shape == rhs.data.shape else float("inf")
        if not (dev <= tol * max(1.0, float(np.max(np.abs(rhs.data), initial=0.0)))):
            report.failures.append(LawFailure(law, list(inputs), lhs.to_json(), rhs.to_json(), dev))

    for _ in range(samples):
        a, b, c = (int(x) for x in rng.integers(1, max_dim + 1, size=3))
        f = MatMorphism(bk, bk.random_array(rng, b, a))
        g = MatMorphism(bk, bk.random_array(rng, c, b))
        need("roundtrip", gp_roundtrip(f, rng), f, [f.to_json()])
        need("compose", gp_extract(gp_compose(gp_embed(g), gp_embed(f))), g.compose(f), [f.to_json(), g.to_json()])
        need("tensor", gp_extract(gp_tensor(gp_embed(f), gp_embed(g))), f.tensor(g), [f.to_json(), g.to_json()])
        need("dagger", gp_extract(gp_dagger(gp_embed(f))), f.dagger(), [f.to_json()])
        need("identity", gp_extract(gp_identity(a)), MatMorphism(bk, bk.eye(a)))
        theta = rng.uniform(0, 2 * np.pi)
        s = MatMorphism(bk, np.array([[cmath.exp(1j * theta)]]))
        got = gp_extract(gp_embed(s))
        need("scalar_phase", got, s)
        if abs(abs(got.data[0, 0]) - 1) > tol:
            report.failures.append(LawFailure("scalar_is_unit", [theta], None, None, abs(abs(got.data[0, 0]) - 1)))
        report.samples += 1
    report.elapsed_ms = (time.perf_counter() - t0) * 1e3
    return report


def local_isometry_state(n: int, tol: float = 1e-9) -> MatMorphism | None:
    """A state I -> n known to be a local isometry: the zero state when
    n = 0, otherwise an isometric state (ψ†ψ = 1).  None if the candidate
    fails its own test."""
    bk = get_backend("float_complex", tol)
    psi = bk.zeros(n, 1)
    if n == 0:
        return MatMorphism(bk, psi)
    psi[0, 0] = 1
    if abs(complex((psi.conj().T @ psi)[0, 0]) - 1) > tol:
        return None
    return MatMorphism(bk, psi)


def gp_cup(n: int) -> QuotMorphism:
    """The cup of n embedded into GP."""
    bk = get_backend("float_complex")
    return gp_embed(MatMorphism(bk, bk.eye(n).reshape(n * n, 1)))


def check_gp_dagger_compact(max_dim: int = 4, tol: float = 1e-9) -> LawReport:
    """Dagger compactness of GP over the quotient of Mat_ℂ, together with the
    local-isometry assumption it rests on.

    The assumption is tested, not presumed: every object must supply a
    witness state before its snake and dagger equations are checked.
    """
    bk = get_backend("float_complex", tol)
    report = LawReport("gp_dagger_compact[float_complex]")
    t0 = time.perf_counter()

    def need(law, lhs: MatMorphism, rhs: MatMorphism, n: int):
        dev = float(np.max(np.abs(lhs.data - rhs.data), initial=0.0)) if lhs.data.shape == rhs.data.shape else float("inf")
        if not dev <= tol * max(1.0, float(np.max(np.abs(rhs.data), initial=0.0))):
            report.failures.append(LawFailure(law, [n], lhs.to_json(), rhs.to_json(), dev))

    for n in range(max_dim + 1):
        if local_isometry_state(n, tol) is None:
            report.failures.append(LawFailure("local_isometry", [n], None, None, float("nan")))
            continue
        if n == 0:
            report.samples += 1
            continue
        cup, ident = gp_cup(n), gp_identity(n)
        # (id ⊗ cup†) ∘ (cup ⊗ id) = id, and the mirror image
        left = gp_compose(gp_tensor(ident, gp_dagger(cup)), gp_tensor(cup, ident))
        right = gp_compose(gp_tensor(gp_dagger(cup), ident), gp_tensor(ident, cup))
        eye = MatMorphism(bk, bk.eye(n))
        need("snake_left", gp_extract(left), eye, n)
        need("snake_right", gp_extract(right), eye, n)
        swap = MatMorphism(bk, np.eye(n * n)[[j * n + i for i in range(n) for j in range(n)]].astype(complex))
        need("cup_symmetric", gp_extract(gp_compose(gp_embed(swap), cup)), gp_extract(cup), n)
        need("cap_is_dagger", gp_extract(gp_dagger(cup)), gp_extract(cup).dagger(), n)
        report.samples += 1
    report.elapsed_ms = (time.perf_counter() - t0) * 1e3
    return report


# ---------------------------------------------------------------------------
# phase generators
# ---------------------------------------------------------------------------


def codiagonal_ii(backend: ScalarBackend) -> MatMorphism:
    """∇ : I ∔ I -> I."""
    return MatMorphism(backend, backend.array([[1, 1]]))


def _sample_phases(rng, group: PhaseGroup, mutant: bool) -> list[MatMorphism]:
    bk = get_backend("float_complex")
    out = [MatMorphism(bk, np.diag([group.sample(rng), group.sample(rng)]).astype(complex))]
    g = group.sample(rng)
    out.append(MatMorphism(bk, np.eye(2, dtype=complex) * g))
    if mutant:
        # not a phase of I ∔ I: it swaps the summands
        out.append(MatMorphism(bk, np.array([[0, 1], [1, 0]], dtype=complex)))
    return out


def check_phase_generator(group: PhaseGroup | str = "circle", samples: int = 200, seed: int = 42,
                          tol: float = 1e-9, max_dim: int = 4, mutant: bool = False) -> LawReport:
    """I is a phase generator: ∇∘U = ∇ implies U = id (phase monic) and
    m∘U = m implies U = id for diagonal monos m : I ∔ I -> A ∔ B (phase
    epic), with equalities in the quotient.

    ``mutant`` injects the summand swap as a fake phase, which commutes
    with ∇ without being trivial."""
    group = PhaseGroup(group) if isinstance(group, str) else group
    report = LawReport(f"phase_generator[{group.kind}{',mutant' if mutant else ''}]")
    t0 = time.perf_counter()
    if group.kind == "trivial" and not mutant:
        report.notes.append("trivial phase group: only U = id, conditions hold vacuously")
        report.samples = samples
        return report
    bk = get_backend("float_complex", tol)
    rng = np.random.default_rng([seed, 14])
    nabla = codiagonal_ii(bk)
    ident = quotient(MatMorphism(bk, np.eye(2, dtype=complex)))
    for _ in range(samples):
        a, b = (int(x) for x in rng.integers(1, max_dim + 1, size=2))
        v, w = bk.random_array(rng, a, 1), bk.random_array(rng, b, 1)
        m = np.zeros((a + b, 2), dtype=complex)
        m[:a, 0:1], m[a:, 1:2] = v, w
        mono = MatMorphism(bk, m)
        for U in _sample_phases(rng, group, mutant):
            trivial = quot_equal(quotient(U), ident, tol)
            if len(report.failures) >= 20:
                break
            if quot_equal(quotient(nabla.compose(U)), quotient(nabla), tol) and not trivial:
                report.failures.append(LawFailure("phase_monic", [U.to_json()], None, None, float("nan")))
            if quot_equal(quotient(mono.compose(U)), quotient(mono), tol) and not trivial:
                report.failures.append(LawFailure("phase_epic", [U.to_json(), mono.to_json()], None, None, float("nan")))
        report.samples += 1
    report.elapsed_ms = (time.perf_counter() - t0) * 1e3
    return report


def check_phase_centrality(group: PhaseGroup | str = "circle", samples: int = 200, seed: int = 42,
                           tol: float = 1e-9, max_dim: int = 4, mutant: bool = False) -> LawReport:
    """Global phases u·id commute with every morphism.  ``mutant`` replaces
    u·id by u·diag(1, -1, 1, …), which is not central."""
    group = PhaseGroup(group) if isinstance(group, str) else group
    bk = get_backend("float_complex", tol)
    rng = np.random.default_rng([seed, 15])
    report = LawReport(f"phase_centrality[{group.kind}{',mutant' if mutant else ''}]")
    t0 = time.perf_counter()
    for _ in range(samples):
        n = int(rng.integers(2, max_dim + 1))
        u = complex(group.sample(rng))
        p = np.eye(n, dtype=complex) * u
        if mutant:
            p[1, 1] = -p[1, 1]
        f = MatMorphism(bk, bk.random_array(rng, n, n))
        P = MatMorphism(bk, p)
        lhs, rhs = P.compose(f), f.compose(P)
        if not lhs.equal(rhs, tol) and len(report.failures) < 20:
            report.failures.append(LawFailure("phase_central", [P.to_json(), f.to_json()], lhs.to_json(), rhs.to_json(),
                                              float(np.max(np.abs(lhs.data - rhs.data)))))
        report.samples += 1
    report.elapsed_ms = (time.perf_counter() - t0) * 1e3
    return report


# ---------------------------------------------------------------------------
# positive-freeness and positive cancellation
# ---------------------------------------------------------------------------


def _diag_positive_witness(backend: ScalarBackend, diag: Sequence):
    """T diagonal with T†T = diag(d), or None."""
    roots = []
    for d in diag:
        if backend.name == "float_complex":
            d = complex(d)
            if abs(d.imag) > backend.tol or d.real < -backend.tol:
                return None
            roots.append(np.sqrt(max(d.real, 0.0)))
            continue
        if not backend.is_positive(d):
            return None
        roots.append(_square_root(backend, d))
    return roots


def _square_root(backend: ScalarBackend, d):
    from .scalars import gauss_sqrt

    if backend.name == "gauss_rat_trivial":
        return gauss_sqrt(d)
    if backend.name == "gauss_rat":
        from .scalars import two_squares

        a, b = two_squares(d.re)
        return GaussRat(a, b)
    raise BackendError(f"no square-root witness for {backend.name}")


def unit_scalars(backend: ScalarBackend, rng: np.random.Generator, count: int) -> list:
    """Sampled unitary scalars u (u†u = 1), always including 1 and -1."""
    out = [backend.one, backend.neg(backend.one)]
    if backend.name == "float_complex":
        out += [cmath.exp(1j * rng.uniform(0, 2 * np.pi)) for _ in range(count)]
        out += [1j, -1j]
    elif backend.name == "gauss_rat":
        out += [PhaseGroup("gauss_units").sample(rng) for _ in range(count)]
        out += [GaussRat(0, 1), GaussRat(0, -1)]
    elif backend.name == "gauss_rat_trivial":
        # u·u = 1 in Q[i] forces u = ±1
        pass
    return [u for u in out if backend.eq(backend.mul(backend.dagger(u), u), backend.one)]


def check_positive_freeness_and_cancellation(backend: ScalarBackend | str = "float_complex", samples: int = 200,
                                             seed: int = 42, tol: float = 1e-9, max_dim: int = 4) -> LawReport:
    """Positive phases diag(1, u) of I ∔ I (and diag(1_A, u·1_B) of A ∔ B) must
    be the identity; positive diagonal p, q with p = q∘U must be equal."""
    bk = get_backend(backend, tol) if isinstance(backend, str) else backend
    rng = np.random.default_rng([seed, 16])
    report = LawReport(f"positive_freeness[{bk.name}]")
    t0 = time.perf_counter()
    seen: set = set()
    for k in range(samples):
        a, b = (int(x) for x in rng.integers(1, max_dim + 1, size=2))
        if k == 0:
            a = b = 1  # I ∔ I first, so the leading witness is diag(1, u)
        for u in unit_scalars(bk, rng, 2):
            diag = [bk.one] * a + [u] * b
            t = _diag_positive_witness(bk, diag)
            is_identity = bk.eq(u, bk.one)
            if t is not None and not is_identity:
                key = (a, b, repr(u))
                if key not in seen and len(report.failures) < 10:
                    seen.add(key)
                    report.failures.append(LawFailure(
                        "positive_phase_is_identity",
                        [{"phase": [payload_to_json(bk.name, x) for x in diag],
                          "sqrt_witness": [payload_to_json(bk.name, x) for x in t]}],
                        None, None, float("nan")))
            # cancellation: positive q, p := q∘U positive ⟹ p = q
            q = [_positive_scalar(bk, rng) for _ in range(a + b)]
            p = [bk.mul(x, y) for x, y in zip(q, diag)]
            if _diag_positive_witness(bk, p) is not None:
                if not all(bk.eq(x, y) for x, y in zip(p, q)) and len(report.failures) < 10:
                    report.failures.append(LawFailure(
                        "positive_cancellation",
                        [{"p": [payload_to_json(bk.name, x) for x in p], "q": [payload_to_json(bk.name, x) for x in q]}],
                        None, None, float("nan")))
        report.samples += 1
    report.elapsed_ms = (time.perf_counter() - t0) * 1e3
    return report


def _positive_scalar(bk: ScalarBackend, rng: np.random.Generator):
    k = int(rng.integers(1, 6))
    if bk.name == "float_complex":
        return complex(k * rng.random() + 0.1)
    if bk.name in ("gauss_rat", "gauss_rat_trivial"):
        return GaussRat(k * k)
    return bk.coerce(k * k)


def positive_freeness_witness(backend: ScalarBackend | str = "gauss_rat_trivial") -> MatMorphism | None:
    """A positive phase diag(1, u) ≠ id of I ∔ I, if one exists among ±1 and
    the sampled units."""
    bk = get_backend(backend) if isinstance(backend, str) else backend
    for u in unit_scalars(bk, np.random.default_rng(0), 8):
        if bk.eq(u, bk.one):
            continue
        if _diag_positive_witness(bk, [bk.one, u]) is not None:
            d = bk.eye(2)
            d[1, 1] = u
            return MatMorphism(bk, d)
    return None
