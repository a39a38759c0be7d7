"""Completely positive maps between matrix algebras, represented by Choi
matrices.

Convention: for Φ : n -> m the Choi matrix is

    C(Φ) = Σ_ij |i><j| ⊗ Φ(|i><j|)

so entry ``C[i*m + a, j*m + b] = Φ(|i><j|)[a, b]``.  For a Kraus operator K
this is ``vec(K) vec(K)†`` with column-stacking ``vec``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .backends import MatCategory, MatMorphism, kron, mat_cup_cap, matmul, swap_permutation
from .catcore import Category, TypeMismatch
from .kernels import KernelRep, kernel, kernel_from_isometry, image
from .scalars import BackendError, GaussRat, ScalarBackend, get_backend, payload_from_json, payload_to_json


class NotCompletelyPositive(ValueError):
    """A Choi matrix that is not positive semidefinite within tolerance."""


@dataclass(frozen=True, eq=False)
class CpmMap:
    n_in: int
    n_out: int
    backend: ScalarBackend
    choi: np.ndarray
    kraus: tuple | None = None

    def __post_init__(self):
        d = self.n_in * self.n_out
        if self.choi.shape != (d, d):
            raise ValueError(f"Choi matrix of a map {self.n_in}->{self.n_out} must be {d}x{d}")

    @property
    def src(self) -> int:
        return self.n_in

    @property
    def tgt(self) -> int:
        return self.n_out

    def tensor4(self) -> np.ndarray:
        """Choi as C[i, a, j, b]."""
        n, m = self.n_in, self.n_out
        return self.choi.reshape(n, m, n, m)

    def superop(self) -> np.ndarray:
        """S[(a,b),(i,j)] with Φ(X)[a,b] = Σ S[(a,b),(i,j)] X[i,j]."""
        n, m = self.n_in, self.n_out
        return self.tensor4().transpose(1, 3, 0, 2).reshape(m * m, n * n)

    def apply(self, x: np.ndarray) -> np.ndarray:
        n, m = self.n_in, self.n_out
        vec = np.asarray(x).reshape(n * n, 1)
        out = matmul(self.backend, self.superop(), vec.astype(self.superop().dtype))
        return out.reshape(m, m)

    def to_json(self) -> dict:
        b = self.backend.name
        enc = lambda a: [[payload_to_json(b, x) for x in row] for row in a.tolist()]  # noqa: E731
        out = {"in": self.n_in, "out": self.n_out, "choi": enc(self.choi)}
        if self.kraus is not None:
            out["kraus"] = [enc(k) for k in self.kraus]
        out["backend"] = b
        return out

    def __repr__(self):
        return f"CpmMap({self.n_in}->{self.n_out}, {self.backend.name})"


def cpm_from_json(obj: dict) -> CpmMap:
    backend = get_backend(obj.get("backend", "float_complex"))
    dec = lambda rows: backend.array([[payload_from_json(backend.name, x) for x in r] for r in rows])  # noqa: E731
    n, m = obj["in"], obj["out"]
    choi = dec(obj["choi"]) if n * m else backend.zeros(0, 0)
    kraus = tuple(dec(k) for k in obj["kraus"]) if obj.get("kraus") is not None else None
    return CpmMap(n, m, backend, choi, kraus)


def _from_superop(backend, s: np.ndarray, n: int, m: int) -> np.ndarray:
    return s.reshape(m, m, n, n).transpose(2, 0, 3, 1).reshape(n * m, n * m)


def _vec(backend: ScalarBackend, f: np.ndarray) -> np.ndarray:
    """Column-stacking vec: v[i*m + a] = f[a, i]."""
    return np.ascontiguousarray(f.T).reshape(-1, 1)


def unvec(v: np.ndarray, n: int, m: int) -> np.ndarray:
    return np.asarray(v).reshape(n, m).T.copy()


def dbl(f: MatMorphism) -> CpmMap:
    """The doubled (pure) map X -> f X f†."""
    b = f.backend
    if not b.caps.has_involution:
        raise BackendError(f"backend {b.name} has no involution")
    v = _vec(b, f.data)
    choi = matmul(b, v, b.conj_array(v).T) if v.size else b.zeros(0, 0)
    return CpmMap(f.cols, f.rows, b, choi, (f.data,))


def from_kraus(backend: ScalarBackend, ops: Sequence[np.ndarray], n: int | None = None, m: int | None = None) -> CpmMap:
    ops = [np.asarray(k) for k in ops]
    if not ops:
        if n is None or m is None:
            raise ValueError("an empty Kraus family needs explicit dimensions")
        return CpmMap(n, m, backend, backend.zeros(n * m, n * m), ())
    m, n = ops[0].shape
    choi = backend.zeros(n * m, n * m)
    for k in ops:
        choi = choi + dbl(MatMorphism(backend, k)).choi
    return CpmMap(n, m, backend, choi, tuple(ops))


def _same(f: CpmMap, g: CpmMap):
    if f.backend.name != g.backend.name:
        raise BackendError("backend mismatch")


def cpm_compose(g: CpmMap, f: CpmMap) -> CpmMap:
    """``g ∘ f``."""
    _same(f, g)
    if f.n_out != g.n_in:
        raise TypeMismatch(f"cannot compose CPM maps {f.n_in}->{f.n_out} then {g.n_in}->{g.n_out}")
    b = f.backend
    s = matmul(b, g.superop(), f.superop())
    kraus = None
    if f.kraus is not None and g.kraus is not None:
        kraus = tuple(matmul(b, kg, kf) for kg in g.kraus for kf in f.kraus)
    return CpmMap(f.n_in, g.n_out, b, _from_superop(b, s, f.n_in, g.n_out), kraus)


def cpm_tensor(f: CpmMap, g: CpmMap) -> CpmMap:
    _same(f, g)
    b = f.backend
    n1, m1, n2, m2 = f.n_in, f.n_out, g.n_in, g.n_out
    k = kron(b, f.choi, g.choi)
    d = n1 * n2 * m1 * m2
    choi = k.reshape(n1, m1, n2, m2, n1, m1, n2, m2).transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(d, d)
    kraus = None
    if f.kraus is not None and g.kraus is not None:
        kraus = tuple(kron(b, a, c) for a in f.kraus for c in g.kraus)
    return CpmMap(n1 * n2, m1 * m2, b, np.ascontiguousarray(choi), kraus)


def cpm_dagger(f: CpmMap) -> CpmMap:
    b = f.backend
    c = f.tensor4().transpose(1, 0, 3, 2).reshape(f.n_in * f.n_out, f.n_in * f.n_out)
    kraus = None if f.kraus is None else tuple(b.conj_array(k).T.copy() for k in f.kraus)
    return CpmMap(f.n_out, f.n_in, b, b.conj_array(np.ascontiguousarray(c)), kraus)


def cpm_add(f: CpmMap, g: CpmMap) -> CpmMap:
    _same(f, g)
    if (f.n_in, f.n_out) != (g.n_in, g.n_out):
        raise TypeMismatch("cannot add CPM maps of different types")
    kraus = None if f.kraus is None or g.kraus is None else f.kraus + g.kraus
    return CpmMap(f.n_in, f.n_out, f.backend, f.choi + g.choi, kraus)


def cpm_scale(f: CpmMap, r) -> CpmMap:
    """Multiply by a scalar r (a CPM scalar must be a nonnegative real)."""
    return CpmMap(f.n_in, f.n_out, f.backend, f.choi * f.backend.coerce(r))


def add_via_biproduct(f: CpmMap, g: CpmMap) -> CpmMap:
    """f + g = ∇ ∘ (f ⊕ g) ∘ Δ, with the copy Δ = Dbl of the stacked identities
    replaced by its CPM counterpart: Δ(X) = X ⊕ X block-diagonally.

    Here ⊕ is realised in one 2n-dimensional algebra restricted to the
    block diagonal, and ∇ sums the two diagonal blocks.
    """
    b = f.backend
    n, m = f.n_in, f.n_out
    eye_n, eye_m = b.eye(n), b.eye(m)
    zn, zm = b.zeros(n, n), b.zeros(m, m)
    k1 = MatMorphism(b, np.concatenate([eye_n, zn], axis=0))  # n -> 2n, first block
    k2 = MatMorphism(b, np.concatenate([zn, eye_n], axis=0))
    copy = cpm_add(dbl(k1), dbl(k2))  # X -> diag(X, X)
    p1 = MatMorphism(b, np.concatenate([eye_m, zm], axis=1))  # 2m -> m
    p2 = MatMorphism(b, np.concatenate([zm, eye_m], axis=1))
    codiag = cpm_add(dbl(p1), dbl(p2))  # diag(Y, Z) -> Y + Z
    inj1 = MatMorphism(b, np.concatenate([b.eye(n), b.zeros(n, n)], axis=1))
    inj2 = MatMorphism(b, np.concatenate([b.zeros(n, n), b.eye(n)], axis=1))
    out1 = MatMorphism(b, np.concatenate([eye_m, zm], axis=0))
    out2 = MatMorphism(b, np.concatenate([zm, eye_m], axis=0))
    # f ⊕ g on the block diagonal: Dbl(out1) f Dbl(inj1) + Dbl(out2) g Dbl(inj2)
    fsum = cpm_add(
        cpm_compose(dbl(out1), cpm_compose(f, dbl(inj1))),
        cpm_compose(dbl(out2), cpm_compose(g, dbl(inj2))),
    )
    return cpm_compose(codiag, cpm_compose(fsum, copy))


def cpm_identity(backend: ScalarBackend, n: int) -> CpmMap:
    return dbl(MatMorphism(backend, backend.eye(n)))


def cpm_discard(backend: ScalarBackend, n: int) -> CpmMap:
    """The trace effect: Choi matrix id_n."""
    return CpmMap(n, 1, backend, backend.eye(n), tuple(backend.eye(n)[i : i + 1, :] for i in range(n)))


def cpm_zero(backend: ScalarBackend, n: int, m: int) -> CpmMap:
    return CpmMap(n, m, backend, backend.zeros(n * m, n * m), ())


def partial_trace_output(f: CpmMap) -> np.ndarray:
    """Σ_a C[i,a,j,a]: equals id_n exactly when f is trace preserving."""
    c4 = f.tensor4()
    out = f.backend.zeros(f.n_in, f.n_in)
    for a in range(f.n_out):
        out = out + c4[:, a, :, a]
    return out


def is_cpm_causal(f: CpmMap, tol: float | None = None) -> bool:
    b = f.backend
    return b.arrays_equal(partial_trace_output(f), b.eye(f.n_in), tol)


def cpm_equal(f: CpmMap, g: CpmMap, tol: float | None = None) -> bool:
    if (f.n_in, f.n_out) != (g.n_in, g.n_out):
        return False
    return f.backend.arrays_equal(f.choi, g.choi, tol)


def choi_distance(f: CpmMap, g: CpmMap) -> float:
    if (f.n_in, f.n_out) != (g.n_in, g.n_out):
        return float("inf")
    return float(np.max(np.abs(np.asarray(f.choi, dtype=complex) - np.asarray(g.choi, dtype=complex)), initial=0.0))


def marginal(f: CpmMap, keep: int, env: int) -> CpmMap:
    """Discard the second output leg: (id_keep ⊗ ⊤_env) ∘ f."""
    if keep * env != f.n_out:
        raise TypeMismatch("output does not split as keep x env")
    b = f.backend
    return cpm_compose(cpm_tensor(cpm_identity(b, keep), cpm_discard(b, env)), f)


# ---------------------------------------------------------------------------
# spectral operations (float backends)
# ---------------------------------------------------------------------------


def _require_float(f: CpmMap):
    if f.backend.exact:
        raise BackendError("this operation needs square roots; use a float backend")


def _eigh(f: CpmMap, tol: float):
    c = np.asarray(f.choi)
    herm = (c + c.conj().T) / 2
    w, v = np.linalg.eigh(herm)
    scale = float(np.max(np.abs(w), initial=0.0))
    if w.size and w[0] < -tol * max(scale, 1.0):
        raise NotCompletelyPositive(f"Choi matrix has eigenvalue {w[0]:.3e}")
    return w, v, scale


def _exact_psd(backend: ScalarBackend, a: np.ndarray) -> bool:
    """Symmetric elimination on a self-adjoint exact matrix: PSD iff every
    pivot is nonnegative and a zero pivot has a zero row."""
    m = a.copy()
    n = m.shape[0]
    zero = backend.zero
    for k in range(n):
        d = m[k, k]
        if isinstance(d, GaussRat):
            if d.im != 0:
                return False
            d = d.re
        if d < 0:
            return False
        if d == 0:
            if any(not backend.is_zero(m[k, j]) for j in range(k + 1, n)):
                return False
            continue
        for i in range(k + 1, n):
            if backend.is_zero(m[i, k]):
                continue
            factor = m[i, k] / m[k, k]
            for j in range(k, n):
                m[i, j] = m[i, j] - factor * m[k, j]
            m[i, k] = zero
    return True


def is_psd(backend: ScalarBackend, a: np.ndarray, tol: float | None = None) -> bool:
    """Positive semidefiniteness of a self-adjoint matrix."""
    a = np.asarray(a)
    if a.size == 0:
        return True
    if not backend.arrays_equal(a, backend.conj_array(a).T, tol):
        return False
    if backend.exact:
        return _exact_psd(backend, a)
    tol = backend.tol if tol is None else tol
    w = np.linalg.eigvalsh((a + a.conj().T) / 2)
    return bool(w[0] >= -tol * max(1.0, float(np.max(np.abs(w)))))


def is_completely_positive(f: CpmMap, tol: float | None = None) -> bool:
    return is_psd(f.backend, f.choi, tol)


def kraus_from_choi(f: CpmMap, tol: float | None = None) -> list[np.ndarray]:
    """Kraus operators √λ unvec(v) for the eigenpairs with λ > tol·λ_max."""
    _require_float(f)
    tol = f.backend.tol if tol is None else tol
    w, v, scale = _eigh(f, tol)
    if scale == 0.0:
        return []
    keep = [k for k in range(w.size) if w[k] > tol * scale]
    keep.sort(key=lambda k: -w[k])
    dtype = f.backend.dtype
    return [(np.sqrt(w[k]) * unvec(v[:, k], f.n_in, f.n_out)).astype(dtype) for k in keep]


def kraus_rank(f: CpmMap, tol: float | None = None) -> int:
    return len(kraus_from_choi(f, tol))


def is_pure(f: CpmMap, tol: float | None = None) -> bool:
    """Rank-one Choi matrix, decided by λ2/λ1 ≤ tol (zero counts as pure)."""
    _require_float(f)
    tol = f.backend.tol if tol is None else tol
    w, _, scale = _eigh(f, tol)
    if scale == 0.0 or w.size < 2:
        return True
    return w[-2] <= tol * w[-1]


def pure_witness(f: CpmMap, tol: float | None = None) -> MatMorphism:
    """A matrix g with Dbl(g) = f for pure f (phase arbitrary)."""
    if not is_pure(f, tol):
        raise ValueError("map is not pure")
    ops = kraus_from_choi(f, tol)
    b = f.backend
    if not ops:
        return MatMorphism(b, b.zeros(f.n_out, f.n_in))
    return MatMorphism(b, ops[0])


def stinespring(f: CpmMap, tol: float | None = None) -> tuple[MatMorphism, int]:
    """V : n -> m·k stacking the k Kraus operators: V = Σ_κ K_κ ⊗ |κ>."""
    ops = kraus_from_choi(f, tol)
    b = f.backend
    k = len(ops)
    n, m = f.n_in, f.n_out
    if k == 0:
        return MatMorphism(b, b.zeros(m, n)), 1
    v = np.zeros((m * k, n), dtype=b.dtype)
    for kappa, op in enumerate(ops):
        v[kappa::k, :] = op
    return MatMorphism(b, v), k


def purify(f: CpmMap, tol: float | None = None) -> CpmMap:
    """Minimal Stinespring purification, a pure map n -> m ⊗ k.

    The environment dimension is ``result.n_out // f.n_out``.
    """
    v, _ = stinespring(f, tol)
    return dbl(v)


def environment_dim(purification: CpmMap, f: CpmMap) -> int:
    return purification.n_out // f.n_out


class EssentialUniquenessError(ValueError):
    pass


def essential_uniqueness_witness(
    f: CpmMap, g: CpmMap, out_dim: int, tol: float | None = None
) -> tuple[np.ndarray, float]:
    """Unitary U on the environment with (id ⊗ Dbl(U)) ∘ f = g.

    ``f``, ``g`` are pure maps A -> B ⊗ C_f and A -> B ⊗ C_g with
    ``B = out_dim`` and equal B-marginals; the smaller environment is padded
    with zeros.  Returns (U, residual in Choi max-norm).
    """
    _require_float(f)
    tol = f.backend.tol if tol is None else tol
    if f.n_in != g.n_in or f.n_out % out_dim or g.n_out % out_dim:
        raise TypeMismatch("purifications have incompatible types")
    kf, kg = f.n_out // out_dim, g.n_out // out_dim
    mf, mg = marginal(f, out_dim, kf), marginal(g, out_dim, kg)
    scale = max(1.0, float(np.max(np.abs(mf.choi), initial=0.0)))
    if choi_distance(mf, mg) > max(tol, 1e-7) * scale:
        raise EssentialUniquenessError("marginals differ; not two purifications of one map")
    k = max(kf, kg)
    vf = _padded_env(pure_witness(f, tol).data, out_dim, kf, k)
    vg = _padded_env(pure_witness(g, tol).data, out_dim, kg, k)
    n, m = f.n_in, out_dim
    # columns: vec of the Kraus operator attached to each environment index
    F = np.stack([vf[c::k, :].T.reshape(-1) for c in range(k)], axis=1)
    G = np.stack([vg[c::k, :].T.reshape(-1) for c in range(k)], axis=1)
    # Procrustes: W unitary minimising |F W - G|, exact when F F† = G G†
    p, _, qh = np.linalg.svd(F.conj().T @ G)
    w = p @ qh
    u = w.T
    b = f.backend
    if b.name == "float_real":
        u = u.real
    lifted = np.kron(np.eye(m), u) @ vf
    residual = choi_distance(dbl(MatMorphism(b, lifted.astype(b.dtype))), dbl(MatMorphism(b, vg.astype(b.dtype))))
    return u.astype(b.dtype), residual


def _padded_env(v: np.ndarray, m: int, k_have: int, k_want: int) -> np.ndarray:
    if k_have == k_want:
        return np.asarray(v)
    n = v.shape[1]
    out = np.zeros((m * k_want, n), dtype=v.dtype)
    for a in range(m):
        out[a * k_want : a * k_want + k_have, :] = v[a * k_have : (a + 1) * k_have, :]
    return out


def cp_axiom_check(f: MatMorphism, g: MatMorphism, tol: float | None = None) -> tuple[bool, bool]:
    """(⊤ ∘ Dbl(f) = ⊤ ∘ Dbl(g),  f†f = g†g); the axiom holds when these agree."""
    if f.cols != g.cols:
        raise TypeMismatch("CP axiom compares morphisms with a common source")
    b = f.backend
    lhs_f = cpm_compose(cpm_discard(b, f.rows), dbl(f))
    lhs_g = cpm_compose(cpm_discard(b, g.rows), dbl(g))
    lhs = cpm_equal(lhs_f, lhs_g, tol)
    rhs = f.dagger().compose(f).equal(g.dagger().compose(g), tol)
    return lhs, rhs


# ---------------------------------------------------------------------------
# kernels of CPM maps
# ---------------------------------------------------------------------------


def cpm_kernel(f: CpmMap, tol: float | None = None) -> KernelRep:
    """Hilbert-space kernel k with ker(f) = Dbl(k): the common kernel of the
    Kraus operators."""
    if f.backend.exact:
        raise BackendError("CPM kernels are computed on float backends")
    v, _ = stinespring(f, tol)
    return kernel(v, tol)


def cpm_image(rho: CpmMap, tol: float | None = None) -> KernelRep:
    """Support of a state (as its Hilbert-space kernel representation)."""
    if rho.n_in != 1:
        raise TypeMismatch("image is computed for states")
    v, _ = stinespring(rho, tol)
    return image(v, tol)


def density(rho: CpmMap) -> np.ndarray:
    """The density matrix of a state 1 -> n."""
    if rho.n_in != 1:
        raise TypeMismatch("not a state")
    return rho.choi.copy()


def state_from_density(backend: ScalarBackend, rho: np.ndarray) -> CpmMap:
    return CpmMap(1, rho.shape[0], backend, np.asarray(rho, dtype=backend.dtype))


def effect_from_matrix(backend: ScalarBackend, e: np.ndarray) -> CpmMap:
    """Effect X -> tr(E X); Choi matrix E^T."""
    return CpmMap(e.shape[0], 1, backend, np.asarray(e, dtype=backend.dtype).T.copy())


# ---------------------------------------------------------------------------
# category
# ---------------------------------------------------------------------------


def random_kraus_map(backend: ScalarBackend, rng: np.random.Generator, n: int, m: int, rank: int | None = None) -> CpmMap:
    rank = int(rng.integers(1, 3)) if rank is None else rank
    return from_kraus(backend, [backend.random_array(rng, m, n) for _ in range(rank)], n, m)


def random_channel(backend: ScalarBackend, rng: np.random.Generator, n: int, m: int, rank: int | None = None) -> CpmMap:
    """A random trace-preserving map (Kraus ops from a random isometry)."""
    rank = int(rng.integers(1, n * m + 1)) if rank is None else rank
    rank = max(rank, -(-n // m))  # an isometry n -> m·rank needs m·rank >= n
    z = backend.random_array(rng, m * rank, n)
    q, _ = np.linalg.qr(z)
    ops = [q[c::rank, :].astype(backend.dtype) for c in range(rank)]
    return from_kraus(backend, ops, n, m)


class CpmCategory(Category):
    """CPM(Mat_S): objects are dimensions, morphisms are Choi matrices."""

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
    object_cap = 16

    def __init__(self, backend: ScalarBackend | str = "float_complex", name: str | None = None):
        self.backend = get_backend(backend) if isinstance(backend, str) else backend
        self.mat = MatCategory(self.backend)
        self.name = name or f"cpm_{self.backend.name}"
        self.exact = self.backend.exact
        self.tol = self.backend.tol

    def unit(self):
        return 1

    def tensor_obj(self, a, b):
        return a * b

    def sample_object(self, rng, max_dim):
        return int(rng.integers(1, max_dim + 1))

    def src(self, f):
        return f.n_in

    def tgt(self, f):
        return f.n_out

    def identity(self, a):
        return cpm_identity(self.backend, a)

    def compose(self, g, f):
        return cpm_compose(g, f)

    def tensor(self, f, g):
        return cpm_tensor(f, g)

    def swap(self, a, b):
        return dbl(self.mat.swap(a, b))

    def dagger(self, f):
        return cpm_dagger(f)

    def discard(self, a):
        return cpm_discard(self.backend, a)

    def zero(self, a, b):
        return cpm_zero(self.backend, a, b)

    def cup(self, a):
        return dbl(mat_cup_cap(self.backend, a)[0])

    def add(self, f, g):
        return cpm_add(f, g)

    def sample_morphism(self, rng, a, b):
        return random_kraus_map(self.backend, rng, a, b)

    def equal(self, f, g, tol=None):
        return cpm_equal(f, g, tol)

    def deviation(self, f, g):
        return choi_distance(f, g)

    def to_json(self, f):
        return f.to_json()


# ---------------------------------------------------------------------------
# biproduct-completion oracle
# ---------------------------------------------------------------------------


def flatten_cpm_blocks(f) -> CpmMap:
    """Embed a block CPM morphism between direct sums of matrix algebras as
    one CPM map on the total dimension: Σ_ji Dbl(ι_j) ∘ f_ji ∘ Dbl(ι_i†)."""
    first = f.blocks[0][0]
    b = first.backend
    n_tot, m_tot = sum(f.src), sum(f.tgt)
    acc = cpm_zero(b, n_tot, m_tot)
    src_off = np.cumsum([0] + list(f.src))
    tgt_off = np.cumsum([0] + list(f.tgt))
    for j, row in enumerate(f.blocks):
        for i, blk in enumerate(row):
            inj = b.zeros(n_tot, f.src[i])
            for r in range(f.src[i]):
                inj[src_off[i] + r, r] = b.one
            outj = b.zeros(m_tot, f.tgt[j])
            for r in range(f.tgt[j]):
                outj[tgt_off[j] + r, r] = b.one
            proj = dbl(MatMorphism(b, inj).dagger())
            emb = dbl(MatMorphism(b, outj))
            acc = cpm_add(acc, cpm_compose(emb, cpm_compose(blk, proj)))
    return acc


def swap_cpm(backend: ScalarBackend, a: int, b: int) -> CpmMap:
    return dbl(MatCategory(backend).swap(a, b))
