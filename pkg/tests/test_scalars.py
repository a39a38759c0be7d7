import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proctheory.scalars import (
    BackendError,
    GaussRat,
    ScalarValue,
    add,
    check_phased_ring,
    dagger,
    gauss_sqrt,
    get_backend,
    is_positive,
    is_sum_of_two_rational_squares,
    mul,
    payload_from_json,
    payload_to_json,
    polar_decompose,
    rational_sqrt,
    scalar_from_json,
    scalar_to_json,
    two_squares,
)

EXACT = ["bool", "nat", "rat_nonneg", "rat", "gauss_rat", "gauss_rat_trivial"]
ALL = EXACT + ["float_real", "float_complex"]


def test_add_examples():
    assert add(ScalarValue("rat", Fraction(1, 2)), ScalarValue("rat", Fraction(1, 3))).payload == Fraction(5, 6)
    assert add(ScalarValue("bool", True), ScalarValue("bool", True)).payload is True
    s = add(ScalarValue("gauss_rat", GaussRat(1, 1)), ScalarValue("gauss_rat", GaussRat(1, -1)))
    assert s.payload == GaussRat(2, 0)


def test_backend_mismatch():
    with pytest.raises(BackendError):
        add(ScalarValue("rat", 1), ScalarValue("nat", 1))


def test_dagger_examples():
    assert dagger(ScalarValue("gauss_rat", GaussRat(2, 3))).payload == GaussRat(2, -3)
    assert dagger(ScalarValue("rat", 5)).payload == 5
    z = dagger(ScalarValue("float_complex", cmath.exp(1j * cmath.pi / 4))).payload
    assert abs(z - cmath.exp(-1j * cmath.pi / 4)) < 1e-12


def test_trivial_involution_on_gaussian_rationals():
    b = get_backend("gauss_rat_trivial")
    assert b.dagger(GaussRat(2, 3)) == GaussRat(2, 3)
    # -1 = i·i is positive when the involution is trivial
    assert b.is_positive(GaussRat(-1, 0))


def test_positivity_examples():
    assert is_positive(ScalarValue("rat", 4))
    assert not is_positive(ScalarValue("rat", 2))
    assert not is_positive(ScalarValue("gauss_rat", 3))
    assert is_positive(ScalarValue("gauss_rat", 5))
    assert not is_positive(ScalarValue("float_complex", -0.5))
    assert is_positive(ScalarValue("float_complex", 0.25))


def _two_squares_bruteforce(q: Fraction, bound: int = 12) -> bool:
    # q = (a/d)^2 + (b/d)^2 searched over small denominators
    for d in range(1, bound + 1):
        for a in range(0, bound * d + 1):
            for b in range(a, bound * d + 1):
                if Fraction(a * a + b * b, d * d) == q:
                    return True
    return False


@pytest.mark.parametrize("q", [Fraction(k) for k in range(0, 26)] + [Fraction(1, 2), Fraction(5, 4), Fraction(3, 4), Fraction(9, 2)])
def test_two_squares_against_search(q):
    assert is_sum_of_two_rational_squares(q) == _two_squares_bruteforce(q)
    xy = two_squares(q)
    if xy is not None:
        assert xy[0] ** 2 + xy[1] ** 2 == q


def test_rational_sqrt():
    assert rational_sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert rational_sqrt(Fraction(2)) is None


def test_gauss_sqrt():
    r = gauss_sqrt(GaussRat(-1, 0))
    assert r is not None and r * r == GaussRat(-1, 0)
    r = gauss_sqrt(GaussRat(0, 2))
    assert r is not None and r * r == GaussRat(0, 2)


def test_polar_examples():
    r, u = polar_decompose(ScalarValue("float_complex", 3 + 4j))
    assert abs(complex(r.payload) - 5) < 1e-12 and abs(complex(u.payload) - (3 + 4j) / 5) < 1e-12
    r, u = polar_decompose(ScalarValue("float_complex", 1))
    assert abs(complex(r.payload) - 1) < 1e-12 and abs(complex(u.payload) - 1) < 1e-12
    r, u = polar_decompose(ScalarValue("float_complex", -2))
    assert abs(complex(r.payload) - 2) < 1e-12 and abs(complex(u.payload) + 1) < 1e-12


def test_polar_errors():
    with pytest.raises(BackendError):
        polar_decompose(ScalarValue("float_complex", 0))
    with pytest.raises(BackendError):
        polar_decompose(ScalarValue("rat", 3))


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_polar_property(x, y):
    z = complex(x, y)
    if abs(z) < 1e-6:
        return
    r, u = polar_decompose(ScalarValue("float_complex", z))
    assert abs(complex(r.payload) * complex(u.payload) - z) <= 1e-9 * (1 + abs(z))
    assert abs(abs(complex(u.payload)) - 1) <= 1e-9


def test_phased_ring_float_example():
    rep = check_phased_ring(get_backend("float_complex"), [(3, 4), (0, 0)])
    assert rep.passed
    first = rep.entries[0]
    assert abs(complex(first.c) - 5) < 1e-12
    assert abs(complex(first.d) - 0.6) < 1e-12 and abs(complex(first.e) - 0.8) < 1e-12


def test_phased_ring_gaussian_rationals():
    b = get_backend("gauss_rat")
    rep = check_phased_ring(b, [(GaussRat(1), GaussRat(1)), (GaussRat(1), GaussRat(0, 1)), (GaussRat(1), GaussRat(2))])
    # 1 + 1 = |1+i|^2 works; 1 + 4 = 5 = |2+i|^2 works
    assert rep.entries[0].passed and rep.entries[1].passed
    rep = check_phased_ring(b, [(GaussRat(1), GaussRat(1, 1))])
    # 1 + 2 = 3 is not a norm in Q[i]
    assert not rep.passed and rep.entries[0].reason


@pytest.mark.parametrize("name", ALL)
def test_semiring_laws(name):
    b = get_backend(name)
    rng = np.random.default_rng(3)
    for _ in range(200):
        x, y, z = b.random(rng), b.random(rng), b.random(rng)
        assert b.eq(b.add(b.add(x, y), z), b.add(x, b.add(y, z)))
        assert b.eq(b.mul(x, b.add(y, z)), b.add(b.mul(x, y), b.mul(x, z)))
        assert b.eq(b.mul(x, y), b.mul(y, x))
        assert b.eq(b.add(x, b.zero), x) and b.eq(b.mul(x, b.one), x)


@pytest.mark.parametrize("name", ALL)
def test_involution_laws_and_norms_positive(name):
    b = get_backend(name)
    rng = np.random.default_rng(4)
    for _ in range(200):
        x, y = b.random(rng), b.random(rng)
        assert b.eq(b.dagger(b.mul(x, y)), b.mul(b.dagger(x), b.dagger(y)))
        assert b.eq(b.dagger(b.add(x, y)), b.add(b.dagger(x), b.dagger(y)))
        assert b.eq(b.dagger(b.dagger(x)), x)
        assert b.is_positive(b.mul(b.dagger(x), x))


@pytest.mark.parametrize("name,value", [
    ("bool", True), ("nat", 12345678901234567890), ("rat", Fraction(-3, 7)),
    ("gauss_rat", GaussRat(Fraction(1, 2), -3)), ("float_complex", 1.5 - 2j),
])
def test_json_roundtrip(name, value):
    s = ScalarValue(name, value)
    assert scalar_from_json(name, scalar_to_json(s)).payload == s.payload
    assert payload_from_json(name, payload_to_json(name, value)) == get_backend(name).coerce(value)


def test_json_format():
    assert payload_to_json("rat", Fraction(2, 4)) == {"num": "1", "den": "2"}
    assert payload_to_json("nat", 7) == "7"
    assert payload_to_json("bool", True) is True


def test_float_equality_is_relative():
    b = get_backend("float_complex", 1e-9)
    assert b.eq(1e6, 1e6 + 1e-4)
    assert not b.eq(1.0, 1.0 + 1e-6)


def test_mul_values():
    assert mul(ScalarValue("nat", 6), ScalarValue("nat", 7)).payload == 42
