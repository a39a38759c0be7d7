import numpy as np
import pytest

from proctheory.backends import MatMorphism
from proctheory.catcore import TypeMismatch
from proctheory.cpm import (
    CpmMap,
    EssentialUniquenessError,
    NotCompletelyPositive,
    add_via_biproduct,
    choi_distance,
    cp_axiom_check,
    cpm_add,
    cpm_compose,
    cpm_dagger,
    cpm_discard,
    cpm_equal,
    cpm_from_json,
    cpm_identity,
    cpm_kernel,
    cpm_tensor,
    dbl,
    essential_uniqueness_witness,
    from_kraus,
    is_completely_positive,
    is_cpm_causal,
    is_pure,
    is_psd,
    kraus_from_choi,
    marginal,
    purify,
    random_channel,
    random_kraus_map,
    state_from_density,
)
from proctheory.scalars import BackendError, get_backend

C = get_backend("float_complex")
R = get_backend("float_real")


def M(a):
    return MatMorphism(C, np.asarray(a, dtype=complex))


def vec(a):
    return np.asarray(a).reshape(-1, order="F")


def test_dbl_identity_choi():
    c = dbl(M(np.eye(2))).choi
    assert np.linalg.matrix_rank(c) == 1 and abs(np.trace(c) - 2) < 1e-12
    v = np.array([1, 0, 0, 1])
    assert np.allclose(c, np.outer(v, v))


def test_dbl_zero_and_bra():
    assert np.allclose(dbl(M(np.zeros((2, 2)))).choi, 0)
    c = dbl(M([[1, 0]])).choi
    assert np.allclose(c, np.diag([1, 0]))


def test_choi_convention_oracle():
    # C[i*m+a, j*m+b] = Φ(|i><j|)[a,b], computed straight from the Kraus sum
    rng = np.random.default_rng(1)
    ks = [C.random_array(rng, 3, 2) for _ in range(2)]
    f = from_kraus(C, ks)
    for i in range(2):
        for j in range(2):
            eij = np.zeros((2, 2)); eij[i, j] = 1
            out = sum(k @ eij @ k.conj().T for k in ks)
            assert np.allclose(f.choi[i * 3:(i + 1) * 3, j * 3:(j + 1) * 3], out)


def test_functoriality_of_doubling():
    rng = np.random.default_rng(2)
    f, g = M(C.random_array(rng, 3, 2)), M(C.random_array(rng, 2, 3))
    assert cpm_equal(cpm_compose(dbl(g), dbl(f)), dbl(g.compose(f)))
    assert cpm_equal(cpm_tensor(dbl(f), dbl(g)), dbl(f.tensor(g)))
    assert cpm_equal(cpm_dagger(dbl(f)), dbl(f.dagger()))


def test_addition_examples():
    s = cpm_add(dbl(M([[1], [0]])), dbl(M([[0], [1]])))
    assert np.allclose(s.choi, np.eye(2))
    rng = np.random.default_rng(3)
    for _ in range(20):
        f, g = random_kraus_map(C, rng, 2, 3), random_kraus_map(C, rng, 2, 3)
        assert cpm_equal(cpm_add(f, g), add_via_biproduct(f, g), 1e-9)


def test_dagger_involutive():
    rng = np.random.default_rng(4)
    f = random_kraus_map(C, rng, 2, 3)
    assert cpm_equal(cpm_dagger(cpm_dagger(f)), f)


def test_compose_type_mismatch():
    with pytest.raises(TypeMismatch):
        cpm_compose(cpm_identity(C, 2), cpm_identity(C, 3))


def test_causality_examples():
    assert is_cpm_causal(cpm_identity(C, 2))
    iso = np.linalg.qr(np.random.default_rng(5).normal(size=(3, 2)))[0]
    assert is_cpm_causal(dbl(M(iso)))
    assert not is_cpm_causal(dbl(M(2 * np.eye(2))))


def test_discard_is_trace():
    rho = np.array([[0.3, 0.1], [0.1, 0.2]])
    t = cpm_compose(cpm_discard(C, 2), state_from_density(C, rho))
    assert abs(t.choi[0, 0] - 0.5) < 1e-12


def test_kraus_examples():
    ks = kraus_from_choi(cpm_identity(C, 2))
    assert len(ks) == 1
    k = ks[0]
    phase = k[0, 0] / abs(k[0, 0])
    assert np.allclose(k / phase, np.eye(2))
    dep = CpmMap(2, 2, C, np.eye(4, dtype=complex))
    assert len(kraus_from_choi(dep)) == 4
    assert kraus_from_choi(CpmMap(2, 2, C, np.zeros((4, 4), dtype=complex))) == []


def test_kraus_basis_independence():
    rng = np.random.default_rng(6)
    ks = [C.random_array(rng, 2, 2) for _ in range(3)]
    u = np.linalg.qr(C.random_array(rng, 3, 3))[0]
    mixed = [sum(u[a, b] * ks[b] for b in range(3)) for a in range(3)]
    assert cpm_equal(from_kraus(C, ks), from_kraus(C, mixed), 1e-9)


def test_not_cp_detected():
    swap_choi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            swap_choi[i * 2 + j, j * 2 + i] = 1  # Choi of the transpose map
    t = CpmMap(2, 2, C, swap_choi)
    assert not is_completely_positive(t)
    with pytest.raises(NotCompletelyPositive):
        kraus_from_choi(t)


def test_exact_psd():
    Qb = get_backend("rat")
    assert is_psd(Qb, Qb.array([[2, 1], [1, 1]]))
    assert not is_psd(Qb, Qb.array([[1, 2], [2, 1]]))
    assert not is_psd(Qb, Qb.array([[0, 1], [1, 0]]))


def test_purify_examples():
    f = dbl(M([[1, 2], [0, 1j]]))
    p = purify(f)
    assert p.n_out == f.n_out and cpm_equal(p, f, 1e-9)
    mixed = state_from_density(C, np.eye(2, dtype=complex))
    p = purify(mixed)
    assert p.n_out == 4 and is_pure(p)
    assert choi_distance(marginal(p, 2, 2), mixed) <= 1e-12
    meas = from_kraus(C, [np.diag([1, 0]), np.diag([0, 1])])
    assert purify(meas).n_out == 4


@pytest.mark.parametrize("backend", [C, R])
def test_purification_marginals_and_uniqueness(backend):
    rng = np.random.default_rng(7)
    for _ in range(50):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        f = random_channel(backend, rng, n, m)
        p = purify(f)
        k = p.n_out // m
        assert choi_distance(marginal(p, m, k), f) <= 1e-8
        # second purification through an isometry into a larger environment
        w = np.linalg.qr(backend.random_array(rng, k + 1, k))[0]
        from proctheory.cpm import stinespring
        v, _ = stinespring(f)
        q = dbl(MatMorphism(backend, (np.kron(np.eye(m), w) @ v.data).astype(backend.dtype)))
        u, res = essential_uniqueness_witness(p, q, m)
        assert res <= 1e-6
        assert np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-8)


def test_eu_identity_and_phase():
    rng = np.random.default_rng(8)
    f = random_channel(C, rng, 2, 2, rank=2)
    p = purify(f)
    u, res = essential_uniqueness_witness(p, p, 2)
    assert res <= 1e-9 and np.allclose(u, np.eye(2), atol=1e-8)
    bell = M(np.array([[1], [0], [0], [1]]))
    bell_phase = M(np.array([[1], [0], [0], [1j]]))
    u, res = essential_uniqueness_witness(dbl(bell), dbl(bell_phase), 2)
    assert res <= 1e-9
    assert abs(abs(u[1, 1] / u[0, 0]) - 1) < 1e-9 and abs(u[1, 1] / u[0, 0] - 1j) < 1e-9


def test_eu_rejects_different_marginals():
    a = dbl(M(np.array([[1], [0], [0], [1]])))
    b = dbl(M(np.array([[1], [0], [0], [0]])))
    with pytest.raises(EssentialUniquenessError):
        essential_uniqueness_witness(a, b, 2)


def test_cp_axiom_examples():
    rng = np.random.default_rng(9)
    for _ in range(100):
        f = M(C.random_array(rng, 3, 2))
        u = np.linalg.qr(C.random_array(rng, 3, 3))[0]
        lhs, rhs = cp_axiom_check(f, M(u @ f.data))
        assert lhs and rhs
        lhs, rhs = cp_axiom_check(f, M(C.random_array(rng, 3, 2)))
        assert lhs == rhs == False  # noqa: E712
    z = M(np.zeros((2, 2)))
    assert cp_axiom_check(z, z) == (True, True)


def test_pure_iff_dilations_split():
    rng = np.random.default_rng(10)
    for _ in range(30):
        f = random_kraus_map(C, rng, 2, 2, rank=int(rng.integers(1, 3)))
        p = purify(f)
        k = p.n_out // 2
        assert is_pure(f) == (k == 1)


def test_cpm_scalars_nonnegative():
    rng = np.random.default_rng(11)
    for _ in range(50):
        s = random_kraus_map(C, rng, 1, 1)
        assert s.choi.shape == (1, 1) and abs(s.choi[0, 0].imag) < 1e-12 and s.choi[0, 0].real >= 0


def test_cpm_kernel():
    k = cpm_kernel(dbl(M([[1, 0]])))
    assert k.rank == 1 and np.allclose(k.projection, np.diag([0, 1]))


def test_exact_backend_capabilities():
    Qi = get_backend("gauss_rat")
    f = dbl(MatMorphism(Qi, Qi.array([[1, 0], [0, 1]])))
    assert cpm_equal(cpm_compose(f, f), f)
    with pytest.raises(BackendError):
        purify(f)


def test_json_roundtrip():
    rng = np.random.default_rng(12)
    f = random_kraus_map(C, rng, 2, 2)
    assert cpm_equal(cpm_from_json(f.to_json()), f)
