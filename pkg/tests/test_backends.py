import itertools

import numpy as np
import pytest

from proctheory.backends import (
    SPEK_COPY,
    SPEK_STATE,
    BiproductCompletion,
    ClosureSpec,
    MatCategory,
    MatMorphism,
    Rel,
    RelCategory,
    brute_force_spek_states,
    closure_generate,
    column_sums_equal_one,
    flatten_blocks,
    mat,
    mat_cup_cap,
    mat_from_json,
    relation_from_json,
    relation_pairs,
    relation_to_json,
    spek_closure,
    spek_generators,
    spek_pure_exclusion_witness,
)
from proctheory.catcore import is_causal
from proctheory.cpm import CpmCategory, cpm_equal, flatten_cpm_blocks
from proctheory.scalars import BackendError, get_backend


def subset(*elems):
    """A state of IV given by 1-based elements."""
    return Rel.from_pairs(1, 4, [(0, e - 1) for e in elems])


def effect(*elems):
    return Rel.from_pairs(4, 1, [(e - 1, 0) for e in elems])


def test_cup_examples():
    b = get_backend("nat")
    cup, cap = mat_cup_cap(b, 2)
    assert [int(x) for x in cup.data[:, 0]] == [1, 0, 0, 1]
    assert mat_cup_cap(b, 1)[0].equal(mat("nat", [[1]]))
    Q = MatCategory("rat")
    cup3, cap3 = mat_cup_cap(Q.backend, 3)
    snake = Q.identity(3).tensor(cap3).compose(cup3.tensor(Q.identity(3)))
    assert snake.equal(Q.identity(3))


@pytest.mark.parametrize("name", ["nat", "rat_nonneg", "rat", "float_real"])
def test_causal_iff_column_sums_one(name):
    cat = MatCategory(name)
    rng = np.random.default_rng(5)
    hits = 0
    for _ in range(200):
        f = cat.sample_morphism(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        if rng.random() < 0.3:
            # normalise some columns so both outcomes occur
            data = f.data.copy()
            for j in range(f.cols):
                s = sum(data[:, j], cat.backend.zero)
                if s != 0 and name != "nat":
                    data[:, j] = [x / s for x in data[:, j]]
            f = MatMorphism(cat.backend, data)
        hits += is_causal(cat, f)
        assert is_causal(cat, f) == column_sums_equal_one(f)
    assert hits > 0


def test_rel_dagger_is_converse():
    R = RelCategory()
    rng = np.random.default_rng(6)
    for _ in range(100):
        f = R.sample_morphism(rng, 3, 4)
        assert sorted((j, i) for i, j in relation_pairs(f)) == relation_pairs(R.dagger(f))


def test_rel_json_roundtrip():
    r = Rel.from_pairs(2, 3, [(0, 2), (1, 0)])
    assert relation_pairs(relation_from_json(relation_to_json(r.to_matrix()))) == r.pairs()


def test_mat_json_roundtrip():
    f = mat("gauss_rat", [[1, 2], [3, 4]])
    assert mat_from_json(f.to_json()).equal(f)


def test_biproduct_flatten_oracle():
    Q = MatCategory("rat")
    C = BiproductCompletion(Q)
    rng = np.random.default_rng(7)
    for _ in range(50):
        a, b, c = (C.sample_object(rng, 4) for _ in range(3))
        f, g = C.sample_morphism(rng, a, b), C.sample_morphism(rng, b, c)
        assert flatten_blocks(C.compose(g, f)).equal(flatten_blocks(g).compose(flatten_blocks(f)))


def test_biproduct_equations_and_singletons():
    Q = MatCategory("rat")
    C = BiproductCompletion(Q)
    objs = (2, 3)
    for i in range(2):
        assert C.equal(C.compose(C.projection(objs, i), C.coprojection(objs, i)), C.identity((objs[i],)))
    f = mat("rat", [[1, 2]])
    g = mat("rat", [[3], [4]])
    assert C.equal(C.compose(C.embed(g), C.embed(f)), C.embed(g.compose(f)))


def test_biproduct_requires_addition():
    class NoAdd(RelCategory):
        add = None

    with pytest.raises(BackendError):
        BiproductCompletion(NoAdd())


def test_cpm_biproduct_qubit_plus_bit():
    base = CpmCategory("float_complex")
    C = BiproductCompletion(base)
    rng = np.random.default_rng(8)
    a, b, c = (2, 1), (1, 2), (2, 1)
    for _ in range(10):
        f, g = C.sample_morphism(rng, a, b), C.sample_morphism(rng, b, c)
        assert cpm_equal(flatten_cpm_blocks(C.compose(g, f)), base.compose(flatten_cpm_blocks(g), flatten_cpm_blocks(f)), 1e-9)


def test_spek_generators_match_description():
    assert SPEK_STATE.pairs() == [(0, 0), (0, 2)]
    # copy: 1 -> (1,1),(2,2); 2 -> (1,2),(2,1); 3 -> (3,3),(4,4); 4 -> (3,4),(4,3)
    pairs = {(i, (x, y)) for i, j in SPEK_COPY.pairs() for x, y in [divmod(j, 4)]}
    assert pairs == {(0, (0, 0)), (0, (1, 1)), (1, (0, 1)), (1, (1, 0)), (2, (2, 2)), (2, (3, 3)), (3, (2, 3)), (3, (3, 2))}


def test_spek_closure_states():
    res = spek_closure(1)
    assert res.saturated
    states = [s for s in res.states(1) if not s.is_zero()]
    assert all(s.cardinality() == 2 for s in states)
    assert len(states) == 6
    assert {s.images[0] for s in states} == brute_force_spek_states()


def test_mspek_closure_states():
    res = spek_closure(1, mixed=True)
    assert res.saturated
    sizes = {s.cardinality() for s in res.states(1) if not s.is_zero()}
    assert min(sizes) >= 2 and 4 in sizes


def test_closure_order_independent():
    gens = spek_generators()
    a = closure_generate(ClosureSpec(gens, object_bound=1))
    b = closure_generate(ClosureSpec(list(reversed(gens)), object_bound=1))
    assert a.homs == b.homs


def test_closure_budget_not_saturated():
    res = closure_generate(ClosureSpec(spek_generators(), object_bound=1, budget=20))
    assert not res.saturated


def test_spek_pure_exclusion_examples():
    res = spek_closure(1)
    e = spek_pure_exclusion_witness(subset(1, 3), res)
    assert e is not None and e.compose(subset(1, 3)).is_zero() and not e.is_zero()
    # the displayed effect {2,4} is generated and excludes {1,3}
    assert effect(2, 4) in res.effects(1)
    assert effect(2, 4).compose(subset(1, 3)).is_zero()
    e = spek_pure_exclusion_witness(subset(1, 2), res)
    assert e is not None and e.compose(subset(1, 2)).is_zero()
    assert effect(3, 4) in res.effects(1)


def test_cup_of_spek():
    cup = SPEK_COPY.compose(SPEK_STATE)
    assert cup.pairs() == [(0, 0), (0, 5), (0, 10), (0, 15)]


def test_large_closure_needs_flag():
    with pytest.raises(ValueError):
        spek_closure(3)
