"""Audits of the operational and kernel principles on concrete theories.

Theories: ``cpmC`` (CPM over complex matrices), ``cpmR`` (CPM over real
matrices) and ``mspek`` (mixed Spekkens relations at n ≤ 1).  Every check
is a sampled, decidable property that records JSON witnesses on failure.

Mutants deliberately break one ingredient so that the harness can be seen to
detect it: ``non_isometric_kernels``, ``non_central_phases``, ``non_cp`` and
``non_dagger``.
"""
from __future__ import annotations

import itertools
import platform
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable

import numpy as np

from . import __version__
from .backends import MatMorphism, Rel, SPEK_COPY, SPEK_STATE, spek_closure, spek_pure_exclusion_witness
from .catcore import TypeMismatch
from .cpm import (
    CpmMap,
    NotCompletelyPositive,
    choi_distance,
    cp_axiom_check,
    cpm_add,
    cpm_compose,
    cpm_dagger,
    cpm_discard,
    cpm_equal,
    cpm_identity,
    cpm_scale,
    cpm_tensor,
    cpm_zero,
    dbl,
    effect_from_matrix,
    essential_uniqueness_witness,
    from_kraus,
    is_cpm_causal,
    is_pure,
    kraus_from_choi,
    marginal,
    pure_witness,
    purify,
    random_channel,
    random_kraus_map,
    state_from_density,
    stinespring,
)
from .kernels import (
    KernelRep,
    KernelSpace,
    atom_below,
    check_covering_law,
    complement,
    image,
    kernel,
    kernel_equal,
    kernel_from_isometry,
    meet,
    numerical_rank,
    top,
)
from .phased import check_phase_centrality, canonicalize, gp_embed, gp_extract
from .scalars import ScalarBackend, ScalarValue, check_phased_ring, get_backend, is_positive, polar_decompose

THEORIES = ("cpmC", "cpmR", "mspek")
MUTANTS = ("non_isometric_kernels", "non_central_phases", "non_cp", "non_dagger")

PRINCIPLES = (
    "strong_purification",
    "pure_exclusion",
    "kernels_causally_complemented",
    "conditioning_addition",
    "internal_isomorphism",
    "homogeneity",
    "perfect_distinguishability",
    "ideal_compression",
    "purity_coincidence",
    "covering_law",
    "causal_decomposition",
    "phased_ring_scalars",
    "boundedness_dims",
    "min_dilation",
)
EXTRA_CHECKS = ("cp_axiom", "reconstruction_roundtrip", "local_tomography")
ALL_CHECKS = PRINCIPLES + EXTRA_CHECKS
INFORMATIONAL = ("local_tomography",)

# plain-language statement of each check, carried into reports
DESCRIPTIONS = {
    "strong_purification": "pure maps are closed under composition, tensor and dagger; every map has a pure dilation; purifications agree up to a unitary on the environment; every nonzero object has a causal pure state",
    "pure_exclusion": "every causal pure state on a non-trivial object is annihilated by some nonzero effect",
    "kernels_causally_complemented": "dagger kernels are isometries and k k† + k⊥ k⊥† = id, so the two discarded projections sum to discarding",
    "conditioning_addition": "for orthonormal |0>, |1> and states ρ, σ some f sends |0> to ρ and |1> to σ; addition is cancellative and zero-sum free",
    "internal_isomorphism": "every internal effect is discarding after a completely positive isomorphism",
    "homogeneity": "f†f = g†g implies g = U f for a unitary U",
    "perfect_distinguishability": "a non-internal state is perfectly distinguishable from states supported on its orthocomplement",
    "ideal_compression": "the support of a state gives a compression D, E with D∘E = id fixing its face",
    "purity_coincidence": "tensor purity, addition purity and kernel purity classify sampled maps identically",
    "covering_law": "kernel lattices satisfy the covering law, in agreement with purity being closed under composition",
    "causal_decomposition": "every causal map has a dilation that is a dagger kernel",
    "phased_ring_scalars": "scalars are positive with polar decompositions, the ring of amplitudes is phased and phases are central",
    "boundedness_dims": "iterated splitting by kernel states recovers the dimension of each object",
    "min_dilation": "the Kraus-rank purification is a minimal dilation through which every sampled dilation factors",
    "cp_axiom": "discarded marginals of pure f, g agree iff f†f = g†g",
    "reconstruction_roundtrip": "pure part, phase quotient, GP and doubling rebuild each sampled channel",
    "local_tomography": "informational: product effects span the bipartite effect space",
}

SPEK_CHECKS = ("strong_purification", "pure_exclusion", "cp_axiom")


class AuditConfigError(ValueError):
    pass


@dataclass
class AuditConfig:
    backend: str = "cpmC"
    dims: tuple = (2, 3)
    samples: int = 200
    seed: int = 42
    tol: float = 1e-9
    checks: tuple = ("all",)
    mutant: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.backend not in THEORIES:
            raise AuditConfigError(f"unknown theory {self.backend!r}; choose from {', '.join(THEORIES)}")
        self.dims = tuple(int(d) for d in self.dims)
        if not self.dims or any(d < 0 for d in self.dims):
            raise AuditConfigError("dims must be a nonempty list of nonnegative integers")
        if self.backend == "mspek" and max(self.dims) > 1:
            raise AuditConfigError("mspek audits run at n <= 1 (the saturated closure)")
        if self.backend != "mspek" and max(self.dims) > 6:
            raise AuditConfigError("CPM audits are desk-scale: dims <= 6")
        names = self.selected()
        unknown = [c for c in names if c not in ALL_CHECKS]
        if unknown:
            raise AuditConfigError(f"unknown check(s): {', '.join(unknown)}")
        if self.mutant is not None and self.mutant not in MUTANTS:
            raise AuditConfigError(f"unknown mutant {self.mutant!r}")
        if self.samples < 1:
            raise AuditConfigError("samples must be positive")

    def selected(self) -> list[str]:
        if list(self.checks) == ["all"] or "all" in self.checks:
            return list(ALL_CHECKS)
        return list(self.checks)

    @classmethod
    def from_json(cls, obj: dict) -> "AuditConfig":
        checks = obj.get("checks", ["all"])
        if isinstance(checks, str):
            checks = [checks]
        return cls(
            backend=obj.get("backend", "cpmC"),
            dims=tuple(obj.get("dims", (2, 3))),
            samples=int(obj.get("samples", 200)),
            seed=int(obj.get("seed", 42)),
            tol=float(obj.get("tol", 1e-9)),
            checks=tuple(checks),
            mutant=obj.get("mutant"),
            workers=int(obj.get("workers", 1)),
        )

    def to_json(self) -> dict:
        return {
            "backend": self.backend,
            "dims": list(self.dims),
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
            "checks": list(self.checks),
            "mutant": self.mutant,
        }


@dataclass
class CheckEntry:
    name: str
    status: str  # "pass", "fail", "skipped" or "info"
    samples: int = 0
    witnesses: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "description": DESCRIPTIONS.get(self.name, ""),
            "status": self.status,
            "passed": self.passed,
            "samples": self.samples,
            "witnesses": self.witnesses,
            "notes": self.notes,
        }


@dataclass
class AuditReport:
    config: AuditConfig
    entries: list
    generated_at: str = ""

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def entry(self, name: str) -> CheckEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_json(self) -> dict:
        """Everything except the ``timestamp`` field is a function of the
        config and seed."""
        return {
            "config": self.config.to_json(),
            "metadata": {
                "proctheory": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "passed": self.passed,
            "entries": [e.to_json() for e in self.entries],
            "timestamp": {
                "generated_at": self.generated_at,
                "elapsed_ms": {e.name: round(e.elapsed_ms, 3) for e in self.entries},
            },
        }

    def summary(self) -> str:
        lines = [f"audit {self.config.backend} dims={list(self.config.dims)} seed={self.config.seed}"
                 + (f" mutant={self.config.mutant}" if self.config.mutant else "")]
        for e in self.entries:
            extra = f" ({len(e.witnesses)} witnesses)" if e.status == "fail" else ""
            lines.append(f"  {e.name:32s} {e.status.upper():7s} {e.samples:5d} samples{extra}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# serialisation helpers for witnesses
# ---------------------------------------------------------------------------


def _cjson(a) -> Any:
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return {"re": np.round(a.real, 12).tolist(), "im": np.round(a.imag, 12).tolist()}
    return np.round(a.astype(float), 12).tolist()


def _mjson(f) -> Any:
    if isinstance(f, CpmMap):
        return {"in": f.n_in, "out": f.n_out, "choi": _cjson(f.choi)}
    if isinstance(f, MatMorphism):
        return _cjson(f.data)
    if isinstance(f, Rel):
        return {"dom": f.dom, "cod": f.cod, "pairs": f.pairs()}
    return repr(f)


class _Probe:
    """Collects outcomes of one check."""

    def __init__(self, name: str, max_witnesses: int = 5):
        self.entry = CheckEntry(name, "pass")
        self.max_witnesses = max_witnesses

    def need(self, ok: bool, law: str, **witness) -> bool:
        if not ok:
            self.entry.status = "fail"
            if len(self.entry.witnesses) < self.max_witnesses:
                self.entry.witnesses.append({"law": law, **{k: _mjson(v) if not isinstance(v, (int, float, str, list, dict, type(None))) else v
                                                             for k, v in witness.items()}})
        return ok

    def note(self, text: str):
        if text not in self.entry.notes:
            self.entry.notes.append(text)


# ---------------------------------------------------------------------------
# theories
# ---------------------------------------------------------------------------


class CpmTheory:
    """CPM over a float matrix backend, possibly with a broken ingredient."""

    def __init__(self, name: str, tol: float, mutant: str | None = None):
        self.name = name
        self.backend: ScalarBackend = get_backend("float_complex" if name == "cpmC" else "float_real", tol)
        self.tol = tol
        self.mutant = mutant
        # comparisons of computed (not constructed) quantities
        self.loose = max(tol, 1e-8)

    # -- matrices ---------------------------------------------------------
    def dag(self, f: MatMorphism) -> MatMorphism:
        if self.mutant == "non_dagger":
            return MatMorphism(f.backend, f.data.T.copy())
        return f.dagger()

    def rand(self, rng, m, n) -> MatMorphism:
        return MatMorphism(self.backend, self.backend.random_array(rng, m, n))

    def unitary(self, rng, n) -> np.ndarray:
        q, _ = np.linalg.qr(self.backend.random_array(rng, n, n))
        return q.astype(self.backend.dtype)

    def isometry(self, rng, m, n) -> np.ndarray:
        q, _ = np.linalg.qr(self.backend.random_array(rng, m, n))
        return q[:, :n].astype(self.backend.dtype)

    def unit_vector(self, rng, n) -> np.ndarray:
        v = self.backend.random_array(rng, n, 1)
        return v / np.linalg.norm(v)

    def eye(self, n) -> MatMorphism:
        return MatMorphism(self.backend, self.backend.eye(n))

    # -- kernels ------------------------------------------------------------
    def kernel(self, f: MatMorphism) -> np.ndarray:
        """Isometry (columns) of the dagger kernel of f."""
        k = kernel(f, self.tol)
        iso = k.isometry
        if self.mutant == "non_isometric_kernels" and iso.shape[1]:
            iso = iso * 1.5
        return iso

    def complement(self, iso: np.ndarray) -> np.ndarray:
        """k⊥ = ker(k†)."""
        n = iso.shape[0]
        if iso.shape[1] == 0:
            return np.eye(n, dtype=self.backend.dtype)
        return self.kernel(self.dag(MatMorphism(self.backend, iso)))

    def support(self, rho: CpmMap) -> np.ndarray:
        """Isometry onto the support (image) of a state."""
        rep = image(MatMorphism(self.backend, np.asarray(rho.choi)), self.tol)
        iso = rep.isometry if rep.isometry is not None else np.zeros((rho.n_out, 0))
        if self.mutant == "non_isometric_kernels" and iso.shape[1]:
            iso = iso * 1.5
        return iso

    # -- maps ---------------------------------------------------------------
    def channel(self, rng, n, m, rank=None) -> CpmMap:
        ch = random_channel(self.backend, rng, n, m, rank)
        if self.mutant == "non_cp":
            ch = partial_transpose_output(ch)
        return ch

    def state(self, rng, n, rank=None) -> CpmMap:
        rank = int(rng.integers(1, n + 1)) if rank is None else rank
        z = self.backend.random_array(rng, n, rank)
        rho = z @ z.conj().T
        rho = rho / np.trace(rho).real
        return state_from_density(self.backend, rho)


def partial_transpose_output(f: CpmMap) -> CpmMap:
    """Compose with the (not completely positive) transpose on the output."""
    c4 = f.tensor4().transpose(0, 3, 2, 1)
    d = f.n_in * f.n_out
    return CpmMap(f.n_in, f.n_out, f.backend, np.ascontiguousarray(c4.reshape(d, d)))


def _nontrivial(dims) -> list[int]:
    return [d for d in dims if d >= 2]


def _pick(rng, dims) -> int:
    return int(dims[int(rng.integers(len(dims)))])


# ---------------------------------------------------------------------------
# CPM checks
# ---------------------------------------------------------------------------


def _check_strong_purification(th: CpmTheory, rng, cfg: AuditConfig, probe: _Probe):
    b = th.backend
    dims = [d for d in cfg.dims if d >= 1] or [1]
    for d in dims:
        psi = np.zeros((d, 1), dtype=b.dtype)
        psi[0, 0] = 1
        st = dbl(MatMorphism(b, psi))
        probe.need(is_cpm_causal(st, th.tol) and is_pure(st, th.tol), "causal_pure_state", object=d)
    for _ in range(cfg.samples):
        n, m = _pick(rng, dims), _pick(rng, dims)
        f = th.channel(rng, n, m)
        try:
            p = purify(f, th.tol)
        except NotCompletelyPositive as exc:
            probe.need(False, "purification_exists", map=f, error=str(exc))
            probe.entry.samples += 1
            continue
        k = p.n_out // m
        probe.need(is_pure(p, th.tol), "purification_pure", map=f)
        dev = choi_distance(marginal(p, m, k), f)
        probe.need(dev <= th.loose, "marginal_recovery", map=f, deviation=dev)
        # a second purification through a random isometry on the environment
        k2 = k + int(rng.integers(0, 2))
        w = th.isometry(rng, k2, k)
        v, _ = stinespring(f, th.tol)
        v2 = np.kron(np.eye(m), w) @ v.data
        q = dbl(MatMorphism(b, v2.astype(b.dtype)))
        try:
            _, residual = essential_uniqueness_witness(p, q, m, th.loose)
            probe.need(residual <= 1e-6, "essential_uniqueness", map=f, residual=residual)
        except ValueError as exc:
            probe.need(False, "essential_uniqueness", map=f, error=str(exc))
        # closure of pure maps
        g1, g2 = th.rand(rng, m, n), th.rand(rng, _pick(rng, dims), m)
        probe.need(is_pure(cpm_compose(dbl(g2), dbl(g1)), th.tol), "pure_compose", f=g1, g=g2)
        probe.need(is_pure(cpm_tensor(dbl(g1), dbl(g2)), th.tol), "pure_tensor", f=g1, g=g2)
        probe.need(is_pure(cpm_dagger(dbl(g1)), th.tol), "pure_dagger", f=g1)
        probe.entry.samples += 1


def _check_pure_exclusion(th: CpmTheory, rng, cfg, probe: _Probe):
    dims = _nontrivial(cfg.dims)
    if not dims:
        probe.note("no non-trivial object among dims; holds vacuously")
        return
    b = th.backend
    for _ in range(cfg.samples):
        n = _pick(rng, dims)
        psi = th.unit_vector(rng, n)
        state = dbl(MatMorphism(b, psi))
        # lemma form: a causal pure state is a dagger kernel (an isometry)
        probe.need(np.allclose(th.dag(MatMorphism(b, psi)).data @ psi, 1, atol=th.loose), "pure_state_is_kernel", psi=psi)
        comp = th.complement(psi)
        if comp.shape[1] == 0:
            probe.need(False, "exclusion_effect_exists", psi=psi)
            continue
        e = dbl(th.dag(MatMorphism(b, comp[:, :1])))
        val = cpm_compose(e, state).choi
        probe.need(abs(val[0, 0]) <= th.loose, "effect_annihilates", psi=psi, value=float(abs(val[0, 0])))
        probe.need(float(np.max(np.abs(e.choi))) > th.loose, "effect_nonzero", psi=psi)
        probe.entry.samples += 1


def _check_kernels_complemented(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    dims = [d for d in cfg.dims if d >= 1] or [1]
    for _ in range(cfg.samples):
        n = _pick(rng, dims)
        r = int(rng.integers(0, n + 1))
        f = th.rand(rng, r, n) if r else MatMorphism(b, b.zeros(1, n))
        k = th.kernel(f)
        kp = th.complement(k)
        K, Kp = MatMorphism(b, k), MatMorphism(b, kp)
        probe.need(th.dag(K).compose(K).equal(th.eye(k.shape[1]), th.loose), "kernel_causal", f=f)
        total = K.compose(th.dag(K)).add(Kp.compose(th.dag(Kp)))
        probe.need(total.equal(th.eye(n), th.loose), "complement_sums_to_identity", f=f, kernel=k)
        # the two discarded projections form a test: ⊤ = ⊤∘Dbl(k†) … + ⊤∘Dbl(k⊥†) …
        top_n = cpm_discard(b, n)
        lhs = cpm_add(cpm_compose(cpm_compose(cpm_discard(b, k.shape[1]), dbl(th.dag(K))), cpm_identity(b, n)),
                      cpm_compose(cpm_discard(b, kp.shape[1]), dbl(th.dag(Kp))))
        probe.need(cpm_equal(lhs, top_n, th.loose), "causally_complemented", f=f)
        U = np.concatenate([k, kp], axis=1)
        probe.need(U.shape == (n, n) and np.allclose(th.dag(MatMorphism(b, U)).data @ U, np.eye(n), atol=th.loose),
                   "kernel_pair_unitary", f=f)
        probe.entry.samples += 1


def _check_conditioning(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    dims = _nontrivial(cfg.dims)
    for _ in range(cfg.samples if dims else 0):
        n, m = _pick(rng, dims), _pick(rng, cfg.dims)
        basis = th.isometry(rng, n, 2)
        e0, e1 = MatMorphism(b, basis[:, :1]), MatMorphism(b, basis[:, 1:2])
        rho, sigma = th.state(rng, m), th.state(rng, m)
        f = cpm_add(cpm_compose(rho, dbl(th.dag(e0))), cpm_compose(sigma, dbl(th.dag(e1))))
        probe.need(cpm_equal(cpm_compose(f, dbl(e0)), rho, th.loose), "conditioned_on_0", rho=rho)
        probe.need(cpm_equal(cpm_compose(f, dbl(e1)), sigma, th.loose), "conditioned_on_1", sigma=sigma)
        probe.entry.samples += 1
    # cancellativity and zero-sum freeness of addition
    for _ in range(cfg.samples):
        n, m = _pick(rng, cfg.dims) or 1, _pick(rng, cfg.dims) or 1
        f, g = random_kraus_map(b, rng, n, m), random_kraus_map(b, rng, n, m)
        h = g if rng.random() < 0.5 else random_kraus_map(b, rng, n, m)
        if cpm_equal(cpm_add(f, g), cpm_add(f, h), th.tol):
            probe.need(cpm_equal(g, h, th.tol), "cancellative", f=f, g=g, h=h)
        z = cpm_zero(b, n, m)
        probe.need(not cpm_equal(cpm_add(f, g), z, th.tol) or (cpm_equal(f, z) and cpm_equal(g, z)), "zero_sum_free", f=f, g=g)
        probe.entry.samples += 1


def _check_internal_isomorphism(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    dims = [d for d in cfg.dims if d >= 1]
    for _ in range(cfg.samples if dims else 0):
        n = _pick(rng, dims)
        z = b.random_array(rng, n, n)
        E = z @ z.conj().T + 0.1 * np.eye(n)
        w, v = np.linalg.eigh(E)
        if w[0] <= 100 * th.tol:
            continue
        root = (v * np.sqrt(w)) @ v.conj().T
        e = effect_from_matrix(b, E)
        f = dbl(MatMorphism(b, root.astype(b.dtype)))
        probe.need(cpm_equal(cpm_compose(cpm_discard(b, n), f), e, th.loose), "dilates_effect", effect=E)
        inv = dbl(MatMorphism(b, np.linalg.inv(root).astype(b.dtype)))
        probe.need(cpm_equal(cpm_compose(inv, f), cpm_identity(b, n), th.loose), "isomorphism", effect=E)
        # diagonal effects Σ p_i Dbl(<i|) are dilated by diagonal isomorphisms
        p = rng.uniform(0.1, 1.0, n)
        ed = effect_from_matrix(b, np.diag(p).astype(b.dtype))
        fd = dbl(MatMorphism(b, np.diag(np.sqrt(p)).astype(b.dtype)))
        probe.need(cpm_equal(cpm_compose(cpm_discard(b, n), fd), ed, th.loose), "diagonal_dilation", p=p.tolist())
        probe.entry.samples += 1


def homogeneity_unitary(f: MatMorphism, g: MatMorphism) -> np.ndarray:
    """Unitary U with U f = g when f†f = g†g (orthogonal Procrustes)."""
    p, _, qh = np.linalg.svd(g.data @ f.data.conj().T)
    return p @ qh


def _check_homogeneity(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    dims = [d for d in cfg.dims if d >= 1]
    for _ in range(cfg.samples if dims else 0):
        n, m = _pick(rng, dims), _pick(rng, dims)
        f = th.rand(rng, m, n) if rng.random() > 0.1 else MatMorphism(b, b.zeros(m, n))
        g = MatMorphism(b, th.unitary(rng, m) @ f.data)
        gram_f, gram_g = th.dag(f).compose(f), th.dag(g).compose(g)
        if not probe.need(gram_f.equal(gram_g, th.loose), "gram_equal", f=f, g=g):
            continue
        U = homogeneity_unitary(f, g)
        res = float(np.max(np.abs(U @ f.data - g.data), initial=0.0))
        probe.need(res <= 1e-7, "unitary_found", f=f, g=g, residual=res)
        probe.need(np.allclose(U.conj().T @ U, np.eye(m), atol=th.loose), "is_unitary", f=f)
        probe.entry.samples += 1


def _sample_non_internal(th: CpmTheory, rng, dims):
    n = _pick(rng, dims)
    r = int(rng.integers(0, n))  # rank < n
    if r == 0:
        return n, cpm_zero(th.backend, 1, n)
    return n, th.state(rng, n, r)


def _check_perfect_distinguishability(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    dims = _nontrivial(cfg.dims)
    for _ in range(cfg.samples if dims else 0):
        n, rho = _sample_non_internal(th, rng, dims)
        P = th.support(rho)
        Q = th.complement(P)
        d = cpm_compose(cpm_discard(b, P.shape[1]), dbl(th.dag(MatMorphism(b, P))))
        e = cpm_compose(cpm_discard(b, Q.shape[1]), dbl(th.dag(MatMorphism(b, Q))))
        probe.need(cpm_equal(cpm_compose(d, rho), cpm_compose(cpm_discard(b, n), rho), th.loose), "d_keeps_rho", rho=rho)
        if P.shape[1]:
            sig = dbl(MatMorphism(b, P @ th.unit_vector(rng, P.shape[1])))
            probe.need(cpm_equal(cpm_compose(e, sig), cpm_zero(b, 1, 1), th.loose), "e_kills_face", rho=rho)
            probe.need(cpm_equal(cpm_compose(d, sig), cpm_compose(cpm_discard(b, n), sig), th.loose), "d_keeps_face", rho=rho)
        if Q.shape[1]:
            tau = dbl(MatMorphism(b, Q @ th.unit_vector(rng, Q.shape[1])))
            probe.need(cpm_equal(cpm_compose(d, tau), cpm_zero(b, 1, 1), th.loose), "d_kills_orthogonal", rho=rho)
            probe.need(cpm_equal(cpm_compose(e, tau), cpm_compose(cpm_discard(b, n), tau), th.loose), "e_keeps_orthogonal", rho=rho)
        probe.entry.samples += 1


def _check_ideal_compression(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    dims = [d for d in cfg.dims if d >= 1]
    for _ in range(cfg.samples if dims else 0):
        n = _pick(rng, dims)
        r = int(rng.integers(0, n + 1))
        rho = th.state(rng, n, r) if r else cpm_zero(b, 1, n)
        P = th.support(rho)
        F = P.shape[1]
        E = dbl(MatMorphism(b, P))
        D = dbl(th.dag(MatMorphism(b, P)))
        probe.need(cpm_equal(cpm_compose(D, E), cpm_identity(b, F), th.loose), "decode_encode_identity", rho=rho)
        probe.need(cpm_equal(cpm_compose(E, cpm_compose(D, rho)), rho, th.loose), "fixes_rho", rho=rho)
        if F:
            x = _pick(rng, dims)
            h = th.rand(rng, F, x)
            f = dbl(MatMorphism(b, P @ h.data))
            probe.need(cpm_equal(cpm_compose(E, cpm_compose(D, f)), f, th.loose), "factorisation", rho=rho, f=f)
        probe.entry.samples += 1


def classify_purity(f: CpmMap, tol: float) -> dict:
    """Three independent purity tests on one CPM map."""
    c = np.asarray(f.choi)
    scale = float(np.max(np.abs(c), initial=0.0))
    if scale == 0.0:
        return {"tensor_pure": True, "sum_pure": True, "kernel_pure": True}
    # ⊗-pure: the purification (a dilation) splits off a causal environment state
    p = purify(f, tol)
    k = p.n_out // f.n_out
    tensor_pure = k == 1
    if k > 1:
        env = marginal(cpm_compose(dbl(MatMorphism(f.backend, _swap_legs(f.n_out, k, f.backend))), p), k, f.n_out)
        tr = float(np.real(np.trace(env.choi.reshape(f.n_in, k, f.n_in, k).sum(axis=(0, 2)))))
        split = cpm_tensor(f, cpm_scale(_env_state(env), 1.0 / max(tr, 1e-300)))
        tensor_pure = choi_distance(split, p) <= 1e-6 * max(1.0, scale)
    # +-pure: removing the leading rank-one part leaves nothing
    w, v = np.linalg.eigh((c + c.conj().T) / 2)
    lead = w[-1] * np.outer(v[:, -1], v[:, -1].conj())
    sum_pure = float(np.max(np.abs(c - lead))) <= 1e-6 * scale
    # kernel-pure: the image of the bent state has dimension at most one
    s = np.linalg.svd(c, compute_uv=False)
    kernel_pure = numerical_rank(s, 1e-6).rank <= 1
    return {"tensor_pure": bool(tensor_pure), "sum_pure": bool(sum_pure), "kernel_pure": bool(kernel_pure)}


def _swap_legs(m: int, k: int, backend) -> np.ndarray:
    """Permutation m⊗k -> k⊗m."""
    perm = np.zeros((m * k, m * k), dtype=backend.dtype)
    for a in range(m):
        for c in range(k):
            perm[c * m + a, a * k + c] = 1
    return perm


def _env_state(env_map: CpmMap) -> CpmMap:
    """Turn an n -> k map obtained from a state-like reduction into a state of
    k by tracing the input leg (used only to form the product candidate)."""
    n, k = env_map.n_in, env_map.n_out
    c4 = env_map.tensor4()
    dens = sum(c4[i, :, i, :] for i in range(n))
    return CpmMap(1, k, env_map.backend, np.asarray(dens), None)


def _check_purity_coincidence(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    dims = [d for d in cfg.dims if d >= 1] or [1]
    for i in range(cfg.samples):
        n, m = _pick(rng, dims), _pick(rng, dims)
        kind = i % 3
        if kind == 0:
            f = dbl(th.rand(rng, m, n))
        elif kind == 1:
            f = random_kraus_map(b, rng, n, m, rank=int(rng.integers(2, 4)))
        else:
            f = cpm_zero(b, n, m) if rng.random() < 0.3 else random_kraus_map(b, rng, n, m)
        cls = classify_purity(f, th.tol)
        probe.need(len(set(cls.values())) == 1, "classifications_agree", map=f, classes=cls)
        if kind == 0:
            probe.need(cls["tensor_pure"], "doubled_is_pure", map=f)
        probe.entry.samples += 1
    mixed = state_from_density(b, np.eye(2, dtype=b.dtype))
    cls = classify_purity(mixed, th.tol)
    probe.need(not any(cls.values()), "maximally_mixed_is_impure", classes=cls)


def _check_covering_law(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    dims = [d for d in cfg.dims if d >= 1] or [1]
    for d in dims:
        rep = check_covering_law(KernelSpace(b, d), samples=cfg.samples, seed=int(rng.integers(2**31)))
        probe.entry.samples += rep.samples
        for f in rep.failures[:3]:
            probe.need(False, f"covering[{d}]:{f.law}", inputs=f.inputs)
    for _ in range(cfg.samples):
        n, m, p = _pick(rng, dims), _pick(rng, dims), _pick(rng, dims)
        f, g = th.rand(rng, m, n), th.rand(rng, p, m)
        probe.need(is_pure(cpm_compose(dbl(g), dbl(f)), th.tol), "pure_closed_under_composition", f=f, g=g)


def _check_causal_decomposition(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    dims = [d for d in cfg.dims if d >= 1] or [1]
    for _ in range(cfg.samples):
        n, m = _pick(rng, dims), _pick(rng, dims)
        f = th.channel(rng, n, m)
        try:
            v, k = stinespring(f, th.tol)
        except NotCompletelyPositive as exc:
            probe.need(False, "dilation_exists", map=f, error=str(exc))
            continue
        V = v.data
        probe.need(np.allclose(th.dag(v).data @ V, np.eye(n), atol=th.loose), "dilation_isometry", map=f)
        as_kernel = kernel_from_isometry(b, V)
        probe.need(kernel_equal(image(v, th.tol), as_kernel, th.loose), "dilation_is_kernel", map=f)
        probe.need(choi_distance(marginal(dbl(v), m, k), f) <= th.loose, "dilation_marginal", map=f)
        probe.entry.samples += 1


def _check_phased_ring(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    for _ in range(cfg.samples):
        s = random_kraus_map(b, rng, 1, 1)
        val = complex(s.choi[0, 0])
        sv = ScalarValue("float_complex", val)
        probe.need(abs(val.imag) <= th.loose and val.real >= -th.loose, "scalar_nonnegative", scalar=[val.real, val.imag])
        probe.need(is_positive(sv), "scalar_positive", scalar=[val.real, val.imag])
        if abs(val) > th.tol:
            ph, r = polar_decompose(sv, th.tol)
            probe.need(abs(complex(ph.payload) * complex(r.payload) - val) <= th.loose, "polar", scalar=[val.real, val.imag])
        probe.entry.samples += 1
    grid = [b.coerce(x) for x in (-2.5, -1.0, 0.0, 0.5, 3.0)]
    if b.name == "float_complex":
        grid += [b.coerce(x) for x in (1j, 1 - 2j, -0.5 + 0.25j)]
    report = check_phased_ring(b, [(x, y) for x in grid for y in grid])
    for e in report.entries:
        probe.need(e.passed, "phased_ring", a=str(e.a), b=str(e.b), reason=e.reason)
    probe.need(not report.integral_domain_failures, "integral_domain", failures=[str(x) for x in report.integral_domain_failures])
    group = "circle"
    cen = check_phase_centrality(group, samples=min(cfg.samples, 100), seed=int(rng.integers(2**31)),
                                 tol=th.loose, mutant=(th.mutant == "non_central_phases"))
    for f in cen.failures[:3]:
        probe.need(False, "phase_central", inputs=f.inputs)


def split_into_kernel_states(backend: ScalarBackend, n: int, tol: float = 1e-9) -> list[KernelRep]:
    """Split an object into orthogonal kernel states: take an atom below the
    remaining kernel, then pass to the meet with its complement."""
    rest = top(backend, n)
    parts = []
    while rest.rank > 0 and len(parts) <= n:
        atom = atom_below(rest, tol)
        if atom is None:
            break
        parts.append(atom)
        rest = meet(rest, complement(atom, tol), tol)
    return parts


def _check_boundedness(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    bound = max(4, max(cfg.dims))
    for n in range(0, bound + 1):
        parts = split_into_kernel_states(b, n, th.tol)
        probe.need(len(parts) == n, "dimension_recovered", n=n, found=len(parts))
        if parts:
            cols = np.concatenate([p.isometry for p in parts], axis=1)
            probe.need(np.allclose(cols.conj().T @ cols, np.eye(n), atol=th.loose), "orthonormal_states", n=n)
        probe.entry.samples += 1
    for _ in range(cfg.samples):
        s = random_kraus_map(b, rng, 1, 1)
        r = float(np.real(s.choi[0, 0]))
        bound_n = int(np.ceil(r)) + 1
        probe.need(r < bound_n, "scalar_bounded", scalar=r)
        probe.entry.samples += 1


def _factor_through(p: CpmMap, q: CpmMap, m: int, tol: float):
    """Isometry W with (id_m ⊗ Dbl(W)) ∘ p = q for pure p, q, by least
    squares on the Kraus witnesses (cutoff tol·σ_max)."""
    vp, vq = pure_witness(p, tol).data, pure_witness(q, tol).data
    k, c = p.n_out // m, q.n_out // m
    n = p.n_in
    K = np.stack([vp[a::k, :].T.reshape(-1) for a in range(k)], axis=1)  # (n m) x k
    G = np.stack([vq[a::c, :].T.reshape(-1) for a in range(c)], axis=1)  # (n m) x c
    Wt, *_ = np.linalg.lstsq(K, G, rcond=tol)
    W = Wt.T  # c x k, G = K W^T
    return W, float(np.max(np.abs(K @ Wt - G), initial=0.0))


def _check_min_dilation(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    dims = [d for d in cfg.dims if d >= 1] or [1]
    for i in range(cfg.samples):
        n, m = _pick(rng, dims), _pick(rng, dims)
        f = dbl(th.rand(rng, m, n)) if i % 5 == 0 else th.channel(rng, n, m)
        try:
            p = purify(f, th.tol)
        except NotCompletelyPositive as exc:
            probe.need(False, "minimal_dilation_exists", map=f, error=str(exc))
            continue
        k = p.n_out // m
        probe.need(k == len(kraus_from_choi(f, th.tol)), "environment_is_kraus_rank", map=f)
        if i % 5 == 0:
            probe.need(k == 1, "pure_has_trivial_environment", map=f)
        # a sampled dilation g = (id ⊗ Φ) ∘ p with a random channel Φ on the environment
        c = int(rng.integers(1, 4))
        phi = random_channel(b, rng, k, c)
        g = cpm_compose(cpm_tensor(cpm_identity(b, m), phi), p)
        # construct h from g alone: purify g, then solve for an isometry W
        q = purify(g, th.tol)
        e = q.n_out // (m * c)
        W, res = _factor_through(p, q, m, th.tol)
        probe.need(res <= 1e-7, "dilation_factors", map=f, residual=res)
        probe.need(np.allclose(W.conj().T @ W, np.eye(k), atol=1e-7), "factor_is_isometry", map=f)
        h = cpm_compose(cpm_tensor(cpm_identity(b, c), cpm_discard(b, e)), dbl(MatMorphism(b, W.astype(b.dtype))))
        rebuilt = cpm_compose(cpm_tensor(cpm_identity(b, m), h), p)
        dev = choi_distance(rebuilt, g)
        probe.need(dev <= 1e-7, "factorisation_reproduces_dilation", map=f, deviation=dev)
        # uniqueness: h is determined on the support of the environment marginal
        probe.need(choi_distance(cpm_compose(cpm_tensor(cpm_identity(b, m), phi), p), rebuilt) <= 1e-7,
                   "factor_unique_on_support", map=f)
        probe.entry.samples += 1
    z = cpm_zero(b, 2, 2)
    probe.need(len(kraus_from_choi(z, th.tol)) == 0, "zero_has_zero_dilation")


def _check_cp_axiom(th: CpmTheory, rng, cfg, probe: _Probe):
    b = th.backend
    dims = [d for d in cfg.dims if d >= 1] or [1]
    for i in range(cfg.samples):
        n, m = _pick(rng, dims), _pick(rng, dims)
        f = th.rand(rng, m, n)
        mode = i % 3
        if mode == 0:
            g = MatMorphism(b, th.unitary(rng, m) @ f.data)
        elif mode == 1:
            g = th.rand(rng, m, n)
        else:
            f = MatMorphism(b, b.zeros(m, n))
            g = f
        lhs, rhs = cp_axiom_check(f, g, th.loose)
        probe.need(lhs == rhs, "cp_axiom_biconditional", f=f, g=g, lhs=lhs, rhs=rhs)
        probe.entry.samples += 1


def reconstruction_roundtrip(f: CpmMap, tol: float = 1e-9) -> tuple[CpmMap, float]:
    """Pure part -> phase quotient -> GP -> extract -> doubling -> marginal."""
    b = f.backend
    p = purify(f, tol)
    k = p.n_out // f.n_out
    v = pure_witness(p, tol)
    if b.name != "float_complex":
        v = MatMorphism(get_backend("float_complex", tol), v.data.astype(complex))
    q = canonicalize(v)
    w = gp_extract(gp_embed(q.rep))
    back = dbl(MatMorphism(b, w.data.real.astype(b.dtype) if b.name == "float_real" else w.data))
    out = marginal(back, f.n_out, k)
    return out, choi_distance(out, f)


def _check_roundtrip(th: CpmTheory, rng, cfg, probe: _Probe):
    dims = [d for d in cfg.dims if d >= 1] or [1]
    for _ in range(cfg.samples):
        n, m = _pick(rng, dims), _pick(rng, dims)
        f = th.channel(rng, n, m)
        try:
            _, dev = reconstruction_roundtrip(f, th.tol)
        except NotCompletelyPositive as exc:
            probe.need(False, "roundtrip", map=f, error=str(exc))
            continue
        probe.need(dev <= 1e-7, "roundtrip", map=f, deviation=dev)
        probe.entry.samples += 1


def local_tomography_defect(backend: ScalarBackend, n: int = 2, seed: int = 0) -> int:
    """Dimension of bipartite self-adjoint operators minus the span of
    product effects (0 means locally tomographic)."""
    rng = np.random.default_rng(seed)
    real = backend.name == "float_real"
    local = n * (n + 1) // 2 if real else n * n
    N = n * n
    full = N * (N + 1) // 2 if real else N * N
    vecs = []
    for _ in range(4 * local * local):
        a, c = backend.random_array(rng, n, n), backend.random_array(rng, n, n)
        e = np.kron(a @ a.conj().T, c @ c.conj().T)
        vecs.append(np.concatenate([e.real.ravel(), e.imag.ravel()]))
    span = int(np.linalg.matrix_rank(np.array(vecs), tol=1e-8))
    return full - span


def _check_local_tomography(th: CpmTheory, rng, cfg, probe: _Probe):
    defect = local_tomography_defect(th.backend, 2, int(rng.integers(2**31)))
    probe.entry.status = "info"
    probe.note(f"locally tomographic: {defect == 0} (span defect {defect} on 2x2 systems)")
    probe.entry.samples = 1


CPM_CHECKS: dict[str, Callable] = {
    "strong_purification": _check_strong_purification,
    "pure_exclusion": _check_pure_exclusion,
    "kernels_causally_complemented": _check_kernels_complemented,
    "conditioning_addition": _check_conditioning,
    "internal_isomorphism": _check_internal_isomorphism,
    "homogeneity": _check_homogeneity,
    "perfect_distinguishability": _check_perfect_distinguishability,
    "ideal_compression": _check_ideal_compression,
    "purity_coincidence": _check_purity_coincidence,
    "covering_law": _check_covering_law,
    "causal_decomposition": _check_causal_decomposition,
    "phased_ring_scalars": _check_phased_ring,
    "boundedness_dims": _check_boundedness,
    "min_dilation": _check_min_dilation,
    "cp_axiom": _check_cp_axiom,
    "reconstruction_roundtrip": _check_roundtrip,
    "local_tomography": _check_local_tomography,
}


# ---------------------------------------------------------------------------
# MSpek
# ---------------------------------------------------------------------------


class SpekTheory:
    """MSpek on IV^n, n ≤ 1, with Spek as its pure part."""

    def __init__(self, mutant: str | None = None):
        self.mutant = mutant
        self.spek = spek_closure(1, mixed=False)
        self.mspek = spek_closure(1, mixed=True)
        if not (self.spek.saturated and self.mspek.saturated):
            raise AuditConfigError("Spekkens closure did not saturate; refusing to audit a truncated theory")
        self.cup = SPEK_COPY.compose(SPEK_STATE)
        self.perms = [r for r in self.spek.hom(1, 1) if _is_bijection(r)]

    def pure_states(self) -> list[Rel]:
        return [r for r in self.spek.states(1) if not r.is_zero()]

    def mixed_states(self) -> list[Rel]:
        return [r for r in self.mspek.states(1) if not r.is_zero()]


def _is_bijection(r: Rel) -> bool:
    return r.dom == r.cod and all(bin(m).count("1") == 1 for m in r.images) and len(set(r.images)) == r.dom


def _marginal_first(r: Rel, a: int, c: int) -> Rel:
    """Discard the second factor of a state of a ⊗ c."""
    return Rel.identity(a).tensor(Rel.discard(c)).compose(r)


def _spek_strong_purification(th: SpekTheory, rng, cfg, probe: _Probe):
    pure = th.pure_states()
    purifications: dict = {}
    # Spek-pure states purify themselves; the dilation through I splits trivially
    for s in pure:
        purifications.setdefault(frozenset(s.pairs()), []).append(s.tensor(Rel.identity(1)))
    # (id ⊗ π) ∘ cup for all environment permutations
    for pi in th.perms:
        d = Rel.identity(4).tensor(pi).compose(th.cup)
        purifications.setdefault(frozenset(_marginal_first(d, 4, 4).pairs()), []).append(d)
    for rho in th.mixed_states():
        key = frozenset(rho.pairs())
        found = purifications.get(key, [])
        probe.need(bool(found), "purification_exists", state=rho)
        for d in found:
            if d.cod == 16:
                probe.need(_marginal_first(d, 4, 4).pairs() == rho.pairs(), "marginal_recovery", state=rho)
        # essential uniqueness among purifications on IV ⊗ IV
        wide = [d for d in found if d.cod == 16]
        for d1, d2 in itertools.combinations(wide[:8], 2):
            ok = any(Rel.identity(4).tensor(u).compose(d1).pairs() == d2.pairs() for u in th.perms)
            probe.need(ok, "essential_uniqueness", first=d1, second=d2)
        probe.entry.samples += 1
    probe.need(any(len(s.pairs()) == 2 for s in pure), "causal_pure_state_exists")
    for s in pure:
        probe.need(len(s.pairs()) == 2, "pure_state_cardinality", state=s)


def _spek_pure_exclusion(th: SpekTheory, rng, cfg, probe: _Probe):
    for s in th.pure_states():
        e = spek_pure_exclusion_witness(s, th.spek)
        probe.need(e is not None, "exclusion_effect_exists", state=s)
        if e is not None:
            probe.need(e.compose(s).is_zero() and not e.is_zero(), "effect_annihilates", state=s, effect=e)
        probe.entry.samples += 1


def _spek_cp_axiom(th: SpekTheory, rng, cfg, probe: _Probe):
    pure = [r for r in th.spek.hom(1, 1)] + [r for r in th.spek.states(1)]
    by_src: dict = {}
    for r in pure:
        by_src.setdefault(r.dom, []).append(r)
    for src, group in by_src.items():
        for f, g in itertools.combinations_with_replacement(group, 2):
            if f.cod != g.cod:
                continue
            lhs = Rel.discard(f.cod).compose(f).pairs() == Rel.discard(g.cod).compose(g).pairs()
            rhs = f.converse().compose(f).pairs() == g.converse().compose(g).pairs()
            probe.need(lhs == rhs, "cp_axiom_biconditional", f=f, g=g, lhs=lhs, rhs=rhs)
            probe.entry.samples += 1


SPEK_IMPL: dict[str, Callable] = {
    "strong_purification": _spek_strong_purification,
    "pure_exclusion": _spek_pure_exclusion,
    "cp_axiom": _spek_cp_axiom,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def _run_one(theory, impl: Callable, name: str, cfg: AuditConfig) -> CheckEntry:
    probe = _Probe(name)
    rng = np.random.default_rng([cfg.seed, ALL_CHECKS.index(name)])
    t0 = time.perf_counter()
    try:
        impl(theory, rng, cfg, probe)
    except Exception as exc:  # a broken theory must yield a structured failure
        probe.need(False, "exception", error=f"{type(exc).__name__}: {exc}",
                   where=traceback.format_exc(limit=2).strip().splitlines()[-1])
    probe.entry.elapsed_ms = (time.perf_counter() - t0) * 1e3
    return probe.entry


def run_audit(config: AuditConfig | dict) -> AuditReport:
    """Run the selected checks in declared order; deterministic per seed."""
    cfg = AuditConfig.from_json(config) if isinstance(config, dict) else config
    names = cfg.selected()
    if cfg.backend == "mspek":
        theory = SpekTheory(cfg.mutant)
        impls = SPEK_IMPL
    else:
        theory = CpmTheory(cfg.backend, cfg.tol, cfg.mutant)
        impls = CPM_CHECKS
    jobs = []
    for name in names:
        if name not in impls:
            jobs.append((name, None))
        else:
            jobs.append((name, impls[name]))

    def work(job):
        name, impl = job
        if impl is None:
            return CheckEntry(name, "skipped", notes=[f"not applicable to {cfg.backend}"])
        return _run_one(theory, impl, name, cfg)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            entries = list(pool.map(work, jobs))
    else:
        entries = [work(j) for j in jobs]
    return AuditReport(cfg, entries, datetime.now(timezone.utc).isoformat(timespec="seconds"))


REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "proctheory audit report",
    "type": "object",
    "required": ["config", "metadata", "passed", "entries", "timestamp"],
    "properties": {
        "config": {
            "type": "object",
            "required": ["backend", "dims", "samples", "seed", "tol", "checks"],
            "properties": {
                "backend": {"enum": list(THEORIES)},
                "dims": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "samples": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "tol": {"type": "number"},
                "checks": {"type": "array", "items": {"enum": ["all", *ALL_CHECKS]}},
                "mutant": {"enum": [None, *MUTANTS]},
            },
        },
        "metadata": {"type": "object"},
        "passed": {"type": "boolean"},
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "status", "passed", "samples", "witnesses"],
                "properties": {
                    "name": {"enum": list(ALL_CHECKS)},
                    "description": {"type": "string"},
                    "status": {"enum": ["pass", "fail", "skipped", "info"]},
                    "passed": {"type": "boolean"},
                    "samples": {"type": "integer"},
                    "witnesses": {"type": "array", "items": {"type": "object"}},
                    "notes": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
        "timestamp": {
            "type": "object",
            "description": "the only field that varies between identical runs",
            "properties": {"generated_at": {"type": "string"}, "elapsed_ms": {"type": "object"}},
        },
    },
}
