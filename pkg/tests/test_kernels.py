import numpy as np
import pytest

from proctheory.backends import MatMorphism, mat, relation_from_pairs
from proctheory.kernels import (
    KernelSpace,
    atom_below,
    bottom,
    check_atomicity,
    check_covering_law,
    check_image_meet_lemma,
    check_kernel_factorisation,
    check_orthomodular,
    coimage,
    cokernel,
    complement,
    exact_nullspace,
    image,
    join,
    kernel,
    kernel_equal,
    kernel_from_isometry,
    kernel_members,
    leq,
    meet,
    numerical_rank,
    top,
)
from proctheory.scalars import get_backend

C = get_backend("float_complex")
Q = get_backend("rat")


def test_rel_kernel_example():
    r = relation_from_pairs(2, 1, [(0, 0)])  # {(a, x)}
    assert kernel_members(kernel(r)) == {1}


def test_kernel_of_zero_is_top():
    for name in ["rat", "float_complex", "bool"]:
        b = get_backend(name)
        k = kernel(MatMorphism(b, b.zeros(2, 3)))
        assert kernel_equal(k, top(b, 3))


def test_kernel_of_bra_zero():
    k = kernel(MatMorphism(C, np.array([[1, 0]], dtype=complex)))
    assert k.rank == 1
    assert np.allclose(k.projection, np.diag([0, 1]))


def test_exact_nullspace_oracle():
    # row reduction by hand: x + 2y + 3z = 0 has nullspace of dimension 2
    ns = exact_nullspace(Q, Q.array([[1, 2, 3]]))
    assert ns.shape == (3, 2)
    f = mat("rat", [[1, 2, 3]])
    assert f.compose(MatMorphism(Q, ns)).equal(MatMorphism(Q, Q.zeros(1, 2)))


def test_image_of_rank_one_state_is_support():
    psi = np.array([[1], [1j]], dtype=complex) / np.sqrt(2)
    rho = MatMorphism(C, psi @ psi.conj().T)
    k = image(rho)
    assert k.rank == 1 and np.allclose(k.projection, psi @ psi.conj().T)


def test_coimage_of_identity():
    assert coimage(MatMorphism(C, np.eye(3, dtype=complex))).rows == 3


def test_rel_image():
    r = relation_from_pairs(2, 3, [(0, 2), (1, 2)])
    assert kernel_members(image(r)) == {2}


def test_cokernel_annihilates():
    rng = np.random.default_rng(1)
    f = MatMorphism(C, C.random_array(rng, 4, 2))
    c = cokernel(f)
    assert np.allclose(c.data @ f.data, 0)


def test_complement_examples():
    p0 = kernel_from_isometry(C, np.array([[1], [0]], dtype=complex))
    assert np.allclose(complement(p0).projection, np.diag([0, 1]))
    rng = np.random.default_rng(2)
    k = KernelSpace(C, 4).sample(rng)
    assert kernel_equal(complement(complement(k)), k)
    assert kernel_equal(complement(bottom(C, 3)), top(C, 3))


def test_meet_join_examples():
    e = np.eye(3, dtype=complex)
    a = kernel_from_isometry(C, e[:, :1])
    b = kernel_from_isometry(C, e[:, 1:2])
    assert meet(a, b).rank == 0 and join(a, b).rank == 2
    rng = np.random.default_rng(3)
    k = KernelSpace(C, 3).sample(rng)
    assert kernel_equal(meet(k, k), k) and kernel_equal(meet(k, top(C, 3)), k)


def test_exact_meet_by_row_reduction():
    # span{e1+e2, e3} ∧ span{e1+e2, e1} = span{e1+e2}
    a = KernelSpace(Q, 3).kernel_of_span(Q.array([[1, 0], [1, 0], [0, 1]]))
    b = KernelSpace(Q, 3).kernel_of_span(Q.array([[1, 1], [1, 0], [0, 0]]))
    m = meet(a, b)
    assert m.rank == 1
    assert leq(m, a) and leq(m, b)


@pytest.mark.parametrize("backend,n", [("float_complex", 4), ("float_complex", 1), ("bool", 4), ("bool", 5), ("rat", 3)])
def test_lattice_suites(backend, n):
    space = KernelSpace(backend, n)
    for check in (check_orthomodular, check_image_meet_lemma, check_covering_law, check_atomicity):
        rep = check(space, samples=60, seed=11)
        assert rep.passed, rep.summary()


def test_atom_below_nonzero():
    rng = np.random.default_rng(4)
    k = KernelSpace(C, 4).sample(rng)
    if k.rank:
        a = atom_below(k)
        assert a.rank == 1 and leq(a, k)
    assert atom_below(bottom(C, 2)) is None


def test_kernel_factorisation_property():
    rng = np.random.default_rng(5)
    f = MatMorphism(C, C.random_array(rng, 2, 4))
    k = kernel(f)
    g = MatMorphism(C, k.isometry @ C.random_array(rng, k.rank, 3))
    ok, res = check_kernel_factorisation(f, g)
    assert ok and res <= 1e-9


def test_tensor_compatible_images():
    rng = np.random.default_rng(6)
    f = MatMorphism(C, C.random_array(rng, 3, 1) @ C.random_array(rng, 1, 2))
    g = MatMorphism(C, C.random_array(rng, 2, 2))
    lhs = image(f.tensor(g))
    rhs = kernel_from_isometry(C, np.kron(image(f).isometry, image(g).isometry))
    assert kernel_equal(lhs, rhs, 1e-8)


def test_dagger_zero():
    rng = np.random.default_rng(7)
    for _ in range(20):
        f = MatMorphism(C, C.random_array(rng, 3, 2))
        assert not np.allclose(f.dagger().compose(f).data, 0)


def test_numerical_rank_gap():
    d = numerical_rank(np.array([1.0, 1e-3, 1e-12]), 1e-9)
    assert d.rank == 2
