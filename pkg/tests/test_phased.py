import cmath

import numpy as np
import pytest

from proctheory.backends import MatMorphism
from proctheory.phased import (
    PhaseGroup,
    PhaseMismatch,
    QuotMorphism,
    canonicalize,
    check_gp_dagger_compact,
    check_gp_roundtrip,
    check_phase_centrality,
    check_phase_generator,
    check_phased_coproducts,
    check_positive_freeness_and_cancellation,
    check_quotient_soundness,
    coprojections,
    gp_compose,
    gp_cup,
    gp_dagger,
    gp_embed,
    gp_extract,
    gp_identity,
    gp_object,
    gp_tensor,
    is_gp_morphism,
    local_isometry_state,
    phased_coproduct,
    phased_cotuple,
    positive_freeness_witness,
    quot_equal,
    uniqueness_phase,
)
from proctheory.scalars import BackendError, get_backend

C = get_backend("float_complex")


def M(a):
    return MatMorphism(C, np.asarray(a, dtype=complex))


def test_canonical_form_examples():
    rng = np.random.default_rng(1)
    f = M(C.random_array(rng, 2, 3))
    assert quot_equal(canonicalize(f), canonicalize(M(cmath.exp(1j * np.pi / 3) * f.data)))
    z = canonicalize(M(np.zeros((2, 2))))
    assert np.allclose(z.rep.data, 0)
    rep = canonicalize(f).rep.data
    first = rep.ravel()[np.flatnonzero(np.abs(rep.ravel()) > 0)[0]]
    assert abs(first.imag) <= 1e-9 and first.real > 0


def test_canonicalize_requires_float_complex():
    g = get_backend("gauss_rat")
    with pytest.raises(BackendError):
        canonicalize(MatMorphism(g, g.eye(2)))


def test_cotuple_of_basis_bras():
    q = phased_cotuple(canonicalize(M([[1]])), canonicalize(M([[1]])))
    assert quot_equal(q, canonicalize(M([[1, 1]])))


def test_uniqueness_phase_examples():
    rng = np.random.default_rng(2)
    h = canonicalize(M(C.random_array(rng, 2, 3)))
    U, u = uniqueness_phase(h, h, 1)
    assert np.allclose(U.data, np.eye(3))
    h2 = canonicalize(M(h.rep.data @ np.diag([1, 1j, 1j])))
    U, u = uniqueness_phase(h, h2, 1)
    assert np.allclose(U.data, np.diag([1, 1j, 1j]), atol=1e-9)


def test_uniqueness_phase_mismatch():
    rng = np.random.default_rng(3)
    h = canonicalize(M(C.random_array(rng, 2, 2)))
    h2 = canonicalize(M(C.random_array(rng, 2, 2)))
    with pytest.raises(PhaseMismatch):
        uniqueness_phase(h, h2, 1)


def test_coprojections_orthogonal_isometries():
    k1, k2 = coprojections(C, 2, 3)
    assert np.allclose(k1.data.conj().T @ k1.data, np.eye(2))
    assert np.allclose(k2.data.conj().T @ k2.data, np.eye(3))
    assert np.allclose(k1.data.conj().T @ k2.data, 0)
    w = phased_coproduct(C, 2, 3)
    U = w.phase(1j)
    assert np.allclose(U.data @ k1.data, k1.data)


@pytest.mark.parametrize("check", [check_quotient_soundness, check_phased_coproducts])
def test_quotient_suites(check):
    rep = check(samples=200, max_dim=4)
    assert rep.passed, rep.summary()


def test_gp_roundtrip_suite():
    rep = check_gp_roundtrip(samples=100, max_dim=2)
    assert rep.passed, rep.summary()


def test_gp_examples():
    assert gp_object(3) == 4
    assert np.allclose(gp_extract(gp_identity(2)).data, np.eye(2))
    s = M([[cmath.exp(0.7j)]])
    got = gp_extract(gp_embed(s))
    assert abs(abs(got.data[0, 0]) - 1) < 1e-12 and np.allclose(got.data, s.data)
    assert is_gp_morphism(gp_embed(M(np.eye(2))))


def test_phase_generators():
    assert check_phase_generator("circle", samples=100).passed
    assert check_phase_generator("trivial", samples=20).passed
    bad = check_phase_generator("circle", samples=50, mutant=True)
    assert not bad.passed


def test_phase_centrality_mutant():
    assert check_phase_centrality("circle", samples=50).passed
    bad = check_phase_centrality("circle", samples=50, mutant=True)
    assert not bad.passed and bad.failures[0].law == "phase_central"


@pytest.mark.parametrize("backend", ["float_complex", "gauss_rat"])
def test_positive_freeness_passes(backend):
    rep = check_positive_freeness_and_cancellation(backend, samples=100, max_dim=4)
    assert rep.passed, rep.summary()


def test_trivial_involution_counterexample():
    rep = check_positive_freeness_and_cancellation("gauss_rat_trivial", samples=50, max_dim=4)
    assert not rep.passed
    w = positive_freeness_witness("gauss_rat_trivial")
    b = get_backend("gauss_rat_trivial")
    assert w is not None and w.equal(MatMorphism(b, b.array([[1, 0], [0, -1]])))
    assert positive_freeness_witness("gauss_rat") is None


def test_phase_group_membership():
    g = PhaseGroup("circle")
    assert g.contains(cmath.exp(0.3j)) and not g.contains(2)
    assert PhaseGroup("trivial").contains(1)


def test_quot_json():
    q = canonicalize(M([[1, 2j]]))
    d = q.to_json()
    assert d["phase_group"] == "circle" and d["canonical"] is True
    assert quot_equal(QuotMorphism.from_json(d), q)


def test_gp_dagger_compact_with_local_isometries():
    rep = check_gp_dagger_compact(max_dim=4)
    assert rep.passed and rep.samples == 5
    for n in range(5):
        psi = local_isometry_state(n)
        assert psi is not None and psi.rows == n
        if n:
            assert np.allclose(psi.data.conj().T @ psi.data, 1)


def test_gp_snake_detects_wrong_cup():
    bad = gp_embed(M(2 * np.eye(2).reshape(4, 1)))
    ident = gp_identity(2)
    left = gp_compose(gp_tensor(ident, gp_dagger(bad)), gp_tensor(bad, ident))
    assert not np.allclose(gp_extract(left).data, np.eye(2))
    assert np.allclose(gp_extract(gp_compose(gp_tensor(ident, gp_dagger(gp_cup(2))),
                                             gp_tensor(gp_cup(2), ident))).data, np.eye(2))
