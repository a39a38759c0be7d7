"""Involutive commutative semiring backends.

Matrices elsewhere in the package store raw payloads (``bool``, ``int``,
``Fraction``, :class:`GaussRat`, ``complex``/``float``) in numpy arrays and
carry a :class:`ScalarBackend` alongside; :class:`ScalarValue` is the tagged
form used at API boundaries and in JSON.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9


class BackendError(ValueError):
    """Raised when an operation is not supported by, or mixes, backends."""


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


class GaussRat:
    """Exact element ``re + i*im`` of Q[i]."""

    __slots__ = ("re", "im")

    def __init__(self, re: Any = 0, im: Any = 0):
        if isinstance(re, GaussRat):
            re, im = re.re, re.im + Fraction(im)
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussRat is immutable")

    @classmethod
    def _make(cls, re: Fraction, im: Fraction) -> "GaussRat":
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    @staticmethod
    def _lift(x: Any) -> "GaussRat":
        if isinstance(x, GaussRat):
            return x
        if isinstance(x, (int, Fraction, bool)):
            return GaussRat._make(Fraction(x), Fraction(0))
        return NotImplemented

    def __add__(self, other):
        other = GaussRat._lift(other)
        if other is NotImplemented:
            return other
        return GaussRat._make(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussRat._lift(other)
        if other is NotImplemented:
            return other
        return GaussRat._make(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = GaussRat._lift(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return GaussRat._make(-self.re, -self.im)

    def __mul__(self, other):
        other = GaussRat._lift(other)
        if other is NotImplemented:
            return other
        return GaussRat._make(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "GaussRat":
        return GaussRat._make(self.re, -self.im)

    def inverse(self) -> "GaussRat":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("GaussRat division by zero")
        return GaussRat(self.re / n, -self.im / n)

    def __truediv__(self, other):
        other = GaussRat._lift(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = GaussRat._lift(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __eq__(self, other):
        if isinstance(other, GaussRat):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussRat({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


# ---------------------------------------------------------------------------
# number theory helpers for exact positivity
# ---------------------------------------------------------------------------


def _isqrt_exact(n: int) -> int | None:
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None."""
    q = Fraction(q)
    if q < 0:
        return None
    a = _isqrt_exact(q.numerator)
    b = _isqrt_exact(q.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b)


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_sum_of_two_rational_squares(q: Fraction) -> bool:
    """Two-squares theorem: q >= 0 is x^2 + y^2 over Q iff no prime = 3 mod 4
    divides num*den to an odd power."""
    q = Fraction(q)
    if q < 0:
        return False
    if q == 0:
        return True
    n = q.numerator * q.denominator
    return all(e % 2 == 0 for p, e in _factor(n).items() if p % 4 == 3)


def two_squares(q: Fraction) -> tuple[Fraction, Fraction] | None:
    """Rational (x, y) with x^2 + y^2 = q, or None."""
    q = Fraction(q)
    if not is_sum_of_two_rational_squares(q):
        return None
    den = q.denominator
    n = q.numerator * den  # q = n / den^2
    x = 0
    while x * x <= n:
        y = _isqrt_exact(n - x * x)
        if y is not None:
            return Fraction(x, den), Fraction(y, den)
        x += 1
    return None  # unreachable when the theorem says yes


def gauss_sqrt(a: GaussRat) -> GaussRat | None:
    """Some t in Q[i] with t*t = a, or None."""
    n = rational_sqrt(a.norm())
    if n is None:
        return None
    for x2 in ((a.re + n) / 2, (a.re - n) / 2):
        x = rational_sqrt(x2)
        if x is None:
            continue
        if x != 0:
            t = GaussRat(x, a.im / (2 * x))
        else:
            y = rational_sqrt(-a.re)
            if y is None:
                continue
            t = GaussRat(0, y)
        if t * t == a:
            return t
    return None


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------

BACKEND_NAMES = (
    "bool",
    "nat",
    "rat_nonneg",
    "rat",
    "gauss_rat",
    "gauss_rat_trivial",
    "float_real",
    "float_complex",
)


@dataclass(frozen=True)
class Capabilities:
    has_involution: bool = True
    has_subtraction: bool = False
    has_division: bool = False
    has_sqrt_of_positives: bool = False


@dataclass(frozen=True)
class ScalarBackend:
    """A commutative semiring with involution, acting on raw payloads.

    ``gauss_rat_trivial`` is Q[i] with the identity involution; it exists only
    to exhibit phases that are positive without being trivial.
    """

    name: str
    tol: float = DEFAULT_TOL
    caps: Capabilities = field(default_factory=Capabilities, compare=False)

    @property
    def exact(self) -> bool:
        return not self.name.startswith("float")

    @property
    def dtype(self):
        if self.name == "bool":
            return bool
        if self.name == "float_real":
            return float
        if self.name == "float_complex":
            return complex
        return object

    # -- constants and coercion -------------------------------------------
    def coerce(self, x: Any) -> Any:
        n = self.name
        if n == "bool":
            return bool(x)
        if n == "nat":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise BackendError(f"{x} is not a natural number")
                x = x.numerator
            v = int(x)
            if v < 0 or v != x:
                raise BackendError(f"{x} is not a natural number")
            return v
        if n in ("rat_nonneg", "rat"):
            if isinstance(x, GaussRat):
                if x.im != 0:
                    raise BackendError(f"{x} is not rational")
                x = x.re
            v = Fraction(x)
            if n == "rat_nonneg" and v < 0:
                raise BackendError(f"{x} is negative")
            return v
        if n in ("gauss_rat", "gauss_rat_trivial"):
            if isinstance(x, complex):
                return GaussRat(Fraction(x.real), Fraction(x.imag))
            return GaussRat._lift(x) if not isinstance(x, GaussRat) else x
        if n == "float_real":
            if isinstance(x, complex):
                if abs(x.imag) > self.tol:
                    raise BackendError(f"{x} is not real")
                x = x.real
            return float(x)
        return complex(x)

    @property
    def zero(self):
        return self.coerce(0)

    @property
    def one(self):
        return self.coerce(1)

    # -- scalar operations ------------------------------------------------
    def add(self, a, b):
        if self.name == "bool":
            return bool(a) or bool(b)
        return a + b

    def mul(self, a, b):
        if self.name == "bool":
            return bool(a) and bool(b)
        return a * b

    def neg(self, a):
        if not self.caps.has_subtraction:
            raise BackendError(f"backend {self.name} has no subtraction")
        return -a

    def dagger(self, a):
        if not self.caps.has_involution:
            raise BackendError(f"backend {self.name} has no involution")
        if self.name in ("gauss_rat", "float_complex"):
            return a.conjugate()
        return a

    def eq(self, a, b) -> bool:
        if self.exact:
            return a == b
        scale = 1.0 + max(abs(a), abs(b))
        return abs(a - b) <= self.tol * scale

    def is_zero(self, a) -> bool:
        return self.eq(a, self.zero)

    def is_positive(self, a) -> bool:
        """Whether ``a = t^dagger * t`` for some scalar ``t``."""
        n = self.name
        if not self.caps.has_involution:
            raise BackendError(f"backend {n} has no involution")
        if n == "bool":
            return True
        if n == "nat":
            return _isqrt_exact(a) is not None
        if n in ("rat_nonneg", "rat"):
            return rational_sqrt(a) is not None
        if n == "gauss_rat":
            return a.im == 0 and is_sum_of_two_rational_squares(a.re)
        if n == "gauss_rat_trivial":
            return gauss_sqrt(a) is not None
        if n == "float_real":
            return a >= -self.tol
        return abs(a.imag) <= self.tol and a.real >= -self.tol

    def random(self, rng: np.random.Generator, small: bool = True):
        """A random scalar from a small value set (exact) or a box (float)."""
        n = self.name
        if n == "bool":
            return bool(rng.integers(2))
        if n == "nat":
            return int(rng.integers(0, 4))
        if n == "rat_nonneg":
            return Fraction(int(rng.integers(0, 5)), int(rng.integers(1, 4)))
        if n == "rat":
            return Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
        if n in ("gauss_rat", "gauss_rat_trivial"):
            return GaussRat(
                Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 3))),
                Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 3))),
            )
        if n == "float_real":
            return float(rng.normal())
        return complex(rng.normal(), rng.normal())

    # -- array helpers ----------------------------------------------------
    def array(self, rows: Iterable[Iterable[Any]]) -> np.ndarray:
        data = [[self.coerce(x) for x in row] for row in rows]
        out = np.empty((len(data), len(data[0]) if data else 0), dtype=self.dtype)
        for i, row in enumerate(data):
            for j, x in enumerate(row):
                out[i, j] = x
        return out

    def zeros(self, rows: int, cols: int) -> np.ndarray:
        return np.full((rows, cols), self.zero, dtype=self.dtype)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros(n, n)
        for i in range(n):
            out[i, i] = self.one
        return out

    def ones(self, rows: int, cols: int) -> np.ndarray:
        return np.full((rows, cols), self.one, dtype=self.dtype)

    def conj_array(self, a: np.ndarray) -> np.ndarray:
        if self.name == "float_complex":
            return np.conj(a)
        if self.name == "gauss_rat":
            return np.vectorize(lambda x: x.conjugate(), otypes=[object])(a) if a.size else a.copy()
        return a.copy()

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape[1] != b.shape[0]:
            raise BackendError(f"shape mismatch {a.shape} @ {b.shape}")
        if a.shape[1] == 0:
            return self.zeros(a.shape[0], b.shape[1])
        return a @ b

    def arrays_equal(self, a: np.ndarray, b: np.ndarray, tol: float | None = None) -> bool:
        if a.shape != b.shape:
            return False
        if a.size == 0:
            return True
        if self.exact:
            return bool(np.all(a == b))
        t = self.tol if tol is None else tol
        scale = 1.0 + max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
        return float(np.max(np.abs(a - b))) <= t * scale

    def deviation(self, a: np.ndarray, b: np.ndarray) -> float:
        """Max entrywise deviation (0/1 for exact mismatch)."""
        if a.shape != b.shape:
            return math.inf
        if a.size == 0:
            return 0.0
        if self.exact:
            if self.name == "bool":
                return float(np.any(a != b))
            return max(abs(complex(x) - complex(y)) for x, y in zip(a.flat, b.flat))
        return float(np.max(np.abs(a - b)))

    def random_array(self, rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
        if self.name == "bool":
            return rng.integers(0, 2, size=(rows, cols)).astype(bool)
        if self.name == "float_real":
            return rng.normal(size=(rows, cols))
        if self.name == "float_complex":
            return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
        out = np.empty((rows, cols), dtype=object)
        for idx in np.ndindex(rows, cols):
            out[idx] = self.random(rng)
        return out


_CAPS = {
    "bool": Capabilities(True, False, False, False),
    "nat": Capabilities(True, False, False, False),
    "rat_nonneg": Capabilities(True, False, True, False),
    "rat": Capabilities(True, True, True, False),
    "gauss_rat": Capabilities(True, True, True, False),
    "gauss_rat_trivial": Capabilities(True, True, True, False),
    "float_real": Capabilities(True, True, True, True),
    "float_complex": Capabilities(True, True, True, True),
}


def get_backend(name: str, tol: float = DEFAULT_TOL) -> ScalarBackend:
    if name not in _CAPS:
        raise BackendError(f"unknown scalar backend {name!r}; known: {', '.join(BACKEND_NAMES)}")
    return ScalarBackend(name, tol, _CAPS[name])


# ---------------------------------------------------------------------------
# tagged scalar values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarValue:
    backend: str
    payload: Any

    def __post_init__(self):
        object.__setattr__(self, "payload", get_backend(self.backend).coerce(self.payload))

    def __str__(self):
        return f"{self.payload}"


def _same(a: ScalarValue, b: ScalarValue) -> ScalarBackend:
    if a.backend != b.backend:
        raise BackendError(f"backend mismatch: {a.backend} vs {b.backend}")
    return get_backend(a.backend)


def add(a: ScalarValue, b: ScalarValue) -> ScalarValue:
    return ScalarValue(a.backend, _same(a, b).add(a.payload, b.payload))


def mul(a: ScalarValue, b: ScalarValue) -> ScalarValue:
    return ScalarValue(a.backend, _same(a, b).mul(a.payload, b.payload))


def dagger(a: ScalarValue) -> ScalarValue:
    return ScalarValue(a.backend, get_backend(a.backend).dagger(a.payload))


def is_positive(a: ScalarValue) -> bool:
    return get_backend(a.backend).is_positive(a.payload)


def polar_decompose(s: ScalarValue, tol: float = DEFAULT_TOL) -> tuple[ScalarValue, ScalarValue]:
    """Split ``s = r * u`` with ``r > 0`` real and ``u`` unitary.

    Only the float backends have the square roots this needs.
    """
    if s.backend not in ("float_complex", "float_real"):
        raise BackendError(f"polar decomposition unsupported on exact backend {s.backend}")
    z = complex(s.payload)
    r = abs(z)
    if r <= tol:
        raise BackendError("polar decomposition of zero")
    u = z / r
    if s.backend == "float_real":
        return ScalarValue(s.backend, r), ScalarValue(s.backend, u.real)
    return ScalarValue(s.backend, complex(r)), ScalarValue(s.backend, u)


# ---------------------------------------------------------------------------
# phased rings
# ---------------------------------------------------------------------------


@dataclass
class PhasedRingEntry:
    a: Any
    b: Any
    passed: bool
    c: Any = None
    d: Any = None
    e: Any = None
    reason: str = ""


@dataclass
class PhasedRingReport:
    backend: str
    entries: list[PhasedRingEntry]
    integral_domain_failures: list[tuple[Any, Any]]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries) and not self.integral_domain_failures


def _norm_root(backend: ScalarBackend, q):
    """Some c with c^dagger * c = q, for a positive q of the backend."""
    n = backend.name
    if n in ("float_complex", "float_real"):
        v = complex(q).real
        return backend.coerce(math.sqrt(max(v, 0.0)))
    if n == "gauss_rat":
        xy = two_squares(q.re) if q.im == 0 else None
        return None if xy is None else GaussRat(*xy)
    if n == "gauss_rat_trivial":
        return gauss_sqrt(q)
    if n == "rat":
        return rational_sqrt(q)
    raise BackendError(f"phased ring check needs subtraction; {n} has none")


def _divide(backend: ScalarBackend, a, c):
    if backend.is_zero(c):
        return backend.zero if backend.is_zero(a) else None
    return a / c


def check_phased_ring(backend: ScalarBackend, samples: Sequence[tuple[Any, Any]]) -> PhasedRingReport:
    """For each (a, b) look for c, d, e with a†a + b†b = c†c, a = cd, b = ce.

    Failures are reported, never raised.
    """
    if not (backend.caps.has_involution and backend.caps.has_subtraction):
        raise BackendError(f"backend {backend.name} lacks involution or subtraction")
    entries: list[PhasedRingEntry] = []
    dom_fail: list[tuple[Any, Any]] = []
    for a, b in samples:
        a, b = backend.coerce(a), backend.coerce(b)
        q = backend.add(backend.mul(backend.dagger(a), a), backend.mul(backend.dagger(b), b))
        c = _norm_root(backend, q)
        if c is None:
            entries.append(PhasedRingEntry(a, b, False, reason=f"{q} is not of the form c^dagger c"))
        else:
            d, e = _divide(backend, a, c), _divide(backend, b, c)
            ok = (
                d is not None
                and e is not None
                and backend.eq(backend.mul(backend.dagger(c), c), q)
                and backend.eq(backend.mul(c, d), a)
                and backend.eq(backend.mul(c, e), b)
            )
            entries.append(PhasedRingEntry(a, b, ok, c, d, e, "" if ok else "divisibility failed"))
        if backend.is_zero(backend.mul(a, b)) and not (backend.is_zero(a) or backend.is_zero(b)):
            dom_fail.append((a, b))
    return PhasedRingReport(backend.name, entries, dom_fail)


def phased_ring_candidates(backend: ScalarBackend, bound: int = 3) -> list[tuple[Any, Any]]:
    """Sample pairs on a small grid that fail the phased-ring condition.

    Diagnostic only: these are counterexample candidates for ``backend`` being
    a phased ring, not a resolution of which non-field rings are phased.
    """
    grid = [backend.coerce(k) for k in range(-bound, bound + 1)]
    if backend.name.startswith("gauss"):
        grid = [GaussRat(x, y) for x in range(-bound, bound + 1) for y in range(-bound, bound + 1)]
    pairs = [(a, b) for a in grid for b in grid]
    report = check_phased_ring(backend, pairs)
    return [(e.a, e.b) for e in report.entries if not e.passed]


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _rat_json(q: Fraction) -> dict:
    q = Fraction(q)
    return {"num": str(q.numerator), "den": str(q.denominator)}


def _rat_from(d: dict) -> Fraction:
    return Fraction(int(d["num"]), int(d["den"]))


def payload_to_json(backend: str, x: Any) -> Any:
    if backend == "bool":
        return bool(x)
    if backend == "nat":
        return str(int(x))
    if backend in ("rat_nonneg", "rat"):
        return _rat_json(x)
    if backend in ("gauss_rat", "gauss_rat_trivial"):
        return {"re": _rat_json(x.re), "im": _rat_json(x.im)}
    z = complex(x)
    return {"re": z.real, "im": z.imag}


def payload_from_json(backend: str, obj: Any) -> Any:
    if backend == "bool":
        return bool(obj)
    if backend == "nat":
        return int(obj)
    if backend in ("rat_nonneg", "rat"):
        return _rat_from(obj)
    if backend in ("gauss_rat", "gauss_rat_trivial"):
        return GaussRat(_rat_from(obj["re"]), _rat_from(obj["im"]))
    z = complex(obj["re"], obj["im"])
    return z.real if backend == "float_real" else z


def scalar_to_json(s: ScalarValue) -> Any:
    return payload_to_json(s.backend, s.payload)


def scalar_from_json(backend: str, obj: Any) -> ScalarValue:
    return ScalarValue(backend, payload_from_json(backend, obj))


def unit_phase(theta: float) -> complex:
    return cmath.exp(1j * theta)
