"""Arithmetic in the Euclidean imaginary quadratic rings O_d, d in {1, 2, 3, 7, 11}.

Elements are written a + b*w with

    w = sqrt(-d)            for d = 1, 2
    w = (1 + sqrt(-d)) / 2  for d = 3, 7, 11

so that w**2 = p + q*w with (p, q) = (-d, 0) or (-(d+1)/4, 1).

Two representations coexist.  `QuadInt` is the public value type.  The
linear algebra works on plain ``(a, b)`` tuples through a `QuadRing`
instance, which avoids object overhead in the inner loops.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

SUPPORTED_D = (1, 2, 3, 7, 11)


class QuadRing:
    """The ring O_d acting on ``(a, b)`` pairs."""

    def __init__(self, d: int):
        if d not in SUPPORTED_D:
            raise ValueError(f"d must be one of {SUPPORTED_D}, got {d}")
        self.d = d
        if d % 4 == 3:
            self.p, self.q = -(d + 1) // 4, 1
            self.disc = -d
        else:
            self.p, self.q = -d, 0
            self.disc = -4 * d
        self.zero = (0, 0)
        self.one = (1, 0)
        self.units = self._units()

    def __repr__(self):
        return f"QuadRing({self.d})"

    def __eq__(self, other):
        return isinstance(other, QuadRing) and other.d == self.d

    def __hash__(self):
        return hash(("QuadRing", self.d))

    # -- basic operations -------------------------------------------------
    def add(self, x, y):
        return (x[0] + y[0], x[1] + y[1])

    def sub(self, x, y):
        return (x[0] - y[0], x[1] - y[1])

    def neg(self, x):
        return (-x[0], -x[1])

    def mul(self, x, y):
        a, b = x
        c, e = y
        be = b * e
        return (a * c + be * self.p, a * e + b * c + be * self.q)

    def conj(self, x):
        a, b = x
        if self.q:
            return (a + b, -b)
        return (a, -b)

    def norm(self, x):
        a, b = x
        if self.q:
            return a * a + a * b + ((self.d + 1) // 4) * b * b
        return a * a + self.d * b * b

    def trace(self, x):
        a, b = x
        return 2 * a + b * self.q

    def is_zero(self, x):
        return x[0] == 0 and x[1] == 0

    def is_unit(self, x):
        return self.norm(x) == 1

    def from_int(self, n: int):
        return (n, 0)

    def is_rational(self, x):
        return x[1] == 0

    def _units(self):
        if self.d == 1:
            return [(1, 0), (-1, 0), (0, 1), (0, -1)]
        if self.d == 3:
            # w is a primitive sixth root of unity
            us, u = [], (1, 0)
            for _ in range(6):
                us.append(u)
                u = self.mul(u, (0, 1))
            return us
        return [(1, 0), (-1, 0)]

    def unit_inverse(self, u):
        # for a unit, u^-1 = conj(u) since N(u) = 1
        return self.conj(u)

    # -- division ----------------------------------------------------------
    def divmod(self, x, y):
        """Euclidean division: x = q*y + r with N(r) < N(y).

        The exact quotient x*conj(y)/N(y) is rounded coordinatewise and the
        neighbouring lattice points are also tried; the candidate with the
        smallest remainder norm wins, ties broken on the remainder (a, b).
        """
        n = self.norm(y)
        if n == 0:
            raise ZeroDivisionError("division by zero in O_%d" % self.d)
        u, v = self.mul(x, self.conj(y))
        if u % n == 0 and v % n == 0:
            return (u // n, v // n), (0, 0)
        fa, fb = u // n, v // n
        best = None
        for qa in (fa, fa + 1):
            for qb in (fb, fb + 1):
                q = (qa, qb)
                r = self.sub(x, self.mul(q, y))
                key = (self.norm(r), r)
                if best is None or key < best[0]:
                    best = (key, q, r)
        (nr, _), q, r = best
        if nr >= n:
            raise ArithmeticError(f"Euclidean division failed in O_{self.d}: {x} / {y}")
        return q, r

    def divides(self, y, x):
        """True when y | x."""
        if self.is_zero(y):
            return self.is_zero(x)
        n = self.norm(y)
        u, v = self.mul(x, self.conj(y))
        return u % n == 0 and v % n == 0

    def exact_div(self, x, y):
        n = self.norm(y)
        u, v = self.mul(x, self.conj(y))
        if u % n or v % n:
            raise ArithmeticError(f"{y} does not divide {x}")
        return (u // n, v // n)

    def canonical(self, x):
        """Canonical associate: the lexicographically largest unit multiple."""
        if self.is_zero(x):
            return x
        return max(self.mul(u, x) for u in self.units)

    def canonical_with_unit(self, x):
        """Return (c, u) with c = u*x canonical."""
        if self.is_zero(x):
            return x, self.one
        return max((self.mul(u, x), u) for u in self.units)

    def xgcd(self, x, y):
        """Extended gcd: returns (g, s, t) with s*x + t*y = g, g canonical."""
        if self.is_zero(x) and self.is_zero(y):
            raise ValueError("gcd(0, 0) is undefined")
        r0, r1 = x, y
        s0, s1 = self.one, self.zero
        t0, t1 = self.zero, self.one
        while not self.is_zero(r1):
            q, r = self.divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, self.sub(s0, self.mul(q, s1))
            t0, t1 = t1, self.sub(t0, self.mul(q, t1))
        g, u = self.canonical_with_unit(r0)
        return g, self.mul(u, s0), self.mul(u, t0)

    def gcd(self, x, y):
        return self.xgcd(x, y)[0]

    # -- embeddings ----------------------------------------------------------
    def to_complex(self, x):
        a, b = x
        if self.q:
            return complex(a + b / 2, b * math.sqrt(self.d) / 2)
        return complex(a, b * math.sqrt(self.d))

    def omega_minpoly(self):
        """(t, n) with w**2 - t*w + n = 0."""
        return self.q, -self.p


class IntegerRing:
    """The integers behind the same interface as `QuadRing`."""

    d = None
    zero = 0
    one = 1
    units = (1, -1)

    def __repr__(self):
        return "ZZ"

    def __eq__(self, other):
        return isinstance(other, IntegerRing)

    def __hash__(self):
        return hash("ZZ")

    def add(self, x, y):
        return x + y

    def sub(self, x, y):
        return x - y

    def neg(self, x):
        return -x

    def mul(self, x, y):
        return x * y

    def norm(self, x):
        return abs(x)

    def is_zero(self, x):
        return x == 0

    def is_unit(self, x):
        return x == 1 or x == -1

    def from_int(self, n):
        return n

    def is_rational(self, x):
        return True

    def conj(self, x):
        return x

    def divmod(self, x, y):
        if y == 0:
            raise ZeroDivisionError("integer division by zero")
        q, r = divmod(x, y)
        # symmetric remainder keeps |r| <= |y|/2
        if 2 * abs(r) > abs(y):
            q, r = q + 1, r - y
        return q, r

    def divides(self, y, x):
        if y == 0:
            return x == 0
        return x % y == 0

    def exact_div(self, x, y):
        q, r = divmod(x, y)
        if r:
            raise ArithmeticError(f"{y} does not divide {x}")
        return q

    def canonical(self, x):
        return abs(x)

    def canonical_with_unit(self, x):
        return (abs(x), -1 if x < 0 else 1)

    def unit_inverse(self, u):
        return u

    def xgcd(self, x, y):
        if x == 0 and y == 0:
            raise ValueError("gcd(0, 0) is undefined")
        s0, s1, t0, t1 = 1, 0, 0, 1
        a, b = x, y
        while b:
            q = a // b
            a, b = b, a - q * b
            s0, s1 = s1, s0 - q * s1
            t0, t1 = t1, t0 - q * t1
        if a < 0:
            a, s0, t0 = -a, -s0, -t0
        return a, s0, t0

    def gcd(self, x, y):
        return math.gcd(x, y)


ZZ = IntegerRing()


@lru_cache(maxsize=None)
def quad_ring(d: int) -> QuadRing:
    return QuadRing(d)


# ---------------------------------------------------------------------------
# Public value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadInt:
    """The element a + b*w of O_d."""

    a: int
    b: int
    d: int

    @classmethod
    def from_pair(cls, x, d):
        return cls(int(x[0]), int(x[1]), d)

    @classmethod
    def omega(cls, d):
        return cls(0, 1, d)

    @property
    def ring(self) -> QuadRing:
        return quad_ring(self.d)

    @property
    def pair(self):
        return (self.a, self.b)

    def _coerce(self, other):
        if isinstance(other, QuadInt):
            if other.d != self.d:
                raise ValueError(f"mixing O_{self.d} and O_{other.d}")
            return other.pair
        if isinstance(other, int):
            return (other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(self.a + o[0], self.b + o[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadInt(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(self.a - o[0], self.b - o[1], self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt.from_pair(self.ring.mul(self.pair, o), self.d)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not integral")
        r = QuadInt(1, 0, self.d)
        base = self
        while e:
            if e & 1:
                r = r * base
            base = base * base
            e >>= 1
        return r

    def __bool__(self):
        return bool(self.a or self.b)

    def __eq__(self, other):
        if isinstance(other, int):
            return self.b == 0 and self.a == other
        if isinstance(other, QuadInt):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def norm(self) -> int:
        return self.ring.norm(self.pair)

    def conj(self) -> "QuadInt":
        return QuadInt.from_pair(self.ring.conj(self.pair), self.d)

    def is_unit(self) -> bool:
        return self.norm() == 1

    def canonical(self) -> "QuadInt":
        return QuadInt.from_pair(self.ring.canonical(self.pair), self.d)

    def to_json(self):
        return {"a": str(self.a), "b": str(self.b), "d": self.d}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["a"]), int(obj["b"]), int(obj["d"]))

    def __repr__(self):
        w = "i" if self.d == 1 else "w"
        if self.b == 0:
            return f"{self.a}"
        if self.a == 0:
            return f"{self.b}*{w}"
        sign = "+" if self.b > 0 else "-"
        return f"({self.a}{sign}{abs(self.b)}*{w})"


def euclid_div(x: QuadInt, y: QuadInt) -> tuple[QuadInt, QuadInt]:
    """Return (q, r) with x = q*y + r and N(r) < N(y)."""
    if x.d != y.d:
        raise ValueError("operands live in different rings")
    q, r = x.ring.divmod(x.pair, y.pair)
    return QuadInt.from_pair(q, x.d), QuadInt.from_pair(r, x.d)


def gcd(x: QuadInt, y: QuadInt) -> QuadInt:
    """Canonical generator of the ideal (x, y)."""
    if x.d != y.d:
        raise ValueError("operands live in different rings")
    return QuadInt.from_pair(x.ring.gcd(x.pair, y.pair), x.d)


def xgcd(x: QuadInt, y: QuadInt) -> tuple[QuadInt, QuadInt, QuadInt]:
    g, s, t = x.ring.xgcd(x.pair, y.pair)
    return tuple(QuadInt.from_pair(v, x.d) for v in (g, s, t))


# ---------------------------------------------------------------------------
# 2x2 matrices
# ---------------------------------------------------------------------------


class Mat2:
    """A 2x2 matrix over O_d, stored as four ``(a, b)`` pairs."""

    __slots__ = ("d", "entries")

    def __init__(self, a, b, c, e, d: int):
        self.d = d
        self.entries = tuple(_as_pair(x) for x in (a, b, c, e))

    @classmethod
    def identity(cls, d):
        return cls(1, 0, 0, 1, d)

    @property
    def ring(self):
        return quad_ring(self.d)

    def __mul__(self, other: "Mat2") -> "Mat2":
        R = self.ring
        a, b, c, e = self.entries
        f, g, h, k = other.entries
        return Mat2(
            R.add(R.mul(a, f), R.mul(b, h)),
            R.add(R.mul(a, g), R.mul(b, k)),
            R.add(R.mul(c, f), R.mul(e, h)),
            R.add(R.mul(c, g), R.mul(e, k)),
            self.d,
        )

    def det(self):
        R = self.ring
        a, b, c, e = self.entries
        return R.sub(R.mul(a, e), R.mul(b, c))

    def inverse(self) -> "Mat2":
        R = self.ring
        det = self.det()
        if not R.is_unit(det):
            raise ArithmeticError("matrix is not invertible over O_d")
        di = R.unit_inverse(det)
        a, b, c, e = self.entries
        return Mat2(R.mul(di, e), R.mul(di, R.neg(b)), R.mul(di, R.neg(c)), R.mul(di, a), self.d)

    def conj(self) -> "Mat2":
        R = self.ring
        return Mat2(*(R.conj(x) for x in self.entries), self.d)

    def scale(self, u) -> "Mat2":
        R = self.ring
        return Mat2(*(R.mul(u, x) for x in self.entries), self.d)

    def __pow__(self, n: int) -> "Mat2":
        base = self if n >= 0 else self.inverse()
        r = Mat2.identity(self.d)
        for _ in range(abs(n)):
            r = r * base
        return r

    def __eq__(self, other):
        return isinstance(other, Mat2) and self.d == other.d and self.entries == other.entries

    def __hash__(self):
        return hash((self.d, self.entries))

    def is_scalar(self):
        a, b, c, e = self.entries
        return b == (0, 0) and c == (0, 0) and a == e

    def scalar_unit(self):
        """The unit u when self = u*I, else None."""
        if self.is_scalar() and self.ring.is_unit(self.entries[0]):
            return self.entries[0]
        return None

    def projective_key(self):
        """A key identifying the matrix up to unit scalars (for PSL/PGL)."""
        R = self.ring
        return min(tuple(R.mul(u, x) for x in self.entries) for u in R.units)

    def quad_entries(self):
        return tuple(QuadInt.from_pair(x, self.d) for x in self.entries)

    def to_json(self):
        return [[QuadInt.from_pair(x, self.d).to_json() for x in self.entries[:2]],
                [QuadInt.from_pair(x, self.d).to_json() for x in self.entries[2:]]]

    def __repr__(self):
        a, b, c, e = self.quad_entries()
        return f"Mat2([[{a}, {b}], [{c}, {e}]])"


def _as_pair(x):
    if isinstance(x, QuadInt):
        return x.pair
    if isinstance(x, int):
        return (x, 0)
    return (int(x[0]), int(x[1]))


# ---------------------------------------------------------------------------
# Residue fields
# ---------------------------------------------------------------------------


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    dd, s = n - 1, 0
    while dd % 2 == 0:
        dd //= 2
        s += 1
    for a in small:
        x = pow(a, dd, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _sqrt_mod(n: int, p: int) -> int | None:
    """A square root of n modulo the prime p, or None."""
    n %= p
    if n == 0 or p == 2:
        return n
    if pow(n, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(n, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def omega_roots_mod(d: int, p: int) -> list[int]:
    """Roots of the minimal polynomial of w modulo p, sorted."""
    R = quad_ring(d)
    t, n = R.omega_minpoly()
    return sorted({r for r in range(p) if (r * r - t * r + n) % p == 0}) if p < 50 else _roots_large(t, n, p)


def _roots_large(t, n, p):
    # w^2 - t w + n = 0  ->  w = (t +- sqrt(t^2 - 4n)) / 2
    disc = (t * t - 4 * n) % p
    s = _sqrt_mod(disc, p)
    if s is None:
        return []
    inv2 = pow(2, -1, p)
    return sorted({(t + s) * inv2 % p, (t - s) * inv2 % p})


def split_type(p: int, d: int) -> tuple[str, QuadInt]:
    """Decomposition type of the rational prime p in O_d and a prime above it."""
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    R = quad_ring(d)
    if R.disc % p == 0:
        kind = "ramified"
    else:
        roots = omega_roots_mod(d, p)
        kind = "split" if roots else "inert"
    if kind == "inert":
        return kind, QuadInt(p, 0, d)
    r = omega_roots_mod(d, p)[0]
    pi = R.gcd((p, 0), (-r, 1))
    assert R.norm(pi) == p
    return kind, QuadInt.from_pair(pi, d)


def primes_above(p: int, d: int) -> list[QuadInt]:
    """All prime elements (canonical) above p, one per prime ideal."""
    kind, pi = split_type(p, d)
    if kind != "split":
        return [pi]
    return [pi, pi.conj().canonical()]


class ResidueField:
    """The residue field O_d/(pi).

    Degree-one fields have integer elements in [0, p).  The inert case has
    elements (x, y) meaning x + y*w mod p, with the Frobenius acting as
    complex conjugation.
    """

    def __init__(self, pi: QuadInt):
        self.pi = pi
        self.d = pi.d
        self.ring = quad_ring(pi.d)
        n = pi.norm()
        if _is_prime(n):
            self.p = n
            self.kind = "ramified" if self.ring.disc % n == 0 else "split"
            self.degree = 1
            a, b = pi.pair
            # pi = a + b w = 0  ->  w = -a/b  (b invertible mod p)
            self.root = (-a * pow(b, -1, n)) % n
            t, nn = self.ring.omega_minpoly()
            if (self.root * self.root - t * self.root + nn) % n:
                raise ValueError(f"{pi} does not generate a prime ideal")
        else:
            p = math.isqrt(n)
            if p * p != n or not _is_prime(p):
                raise ValueError(f"{pi} is not a prime element")
            if pi.canonical() != QuadInt(p, 0, pi.d) or omega_roots_mod(pi.d, p):
                raise ValueError(f"{pi} is not a prime element")
            self.p = p
            self.kind = "inert"
            self.degree = 2
            self.root = None
        self.size = self.p ** self.degree

    def __repr__(self):
        return f"ResidueField(pi={self.pi}, p={self.p}, {self.kind})"

    @property
    def conjugate(self) -> "ResidueField":
        """Residue field of conj(pi)."""
        return ResidueField(self.pi.conj())

    def reduce_pair(self, x):
        a, b = x
        if self.degree == 1:
            return (a + b * self.root) % self.p
        return (a % self.p, b % self.p)

    def reduce(self, x: QuadInt):
        return self.reduce_pair(x.pair)

    # field operations, used for small dense eliminations
    @property
    def zero(self):
        return 0 if self.degree == 1 else (0, 0)

    @property
    def one(self):
        return 1 if self.degree == 1 else (1, 0)

    def add(self, x, y):
        if self.degree == 1:
            return (x + y) % self.p
        return ((x[0] + y[0]) % self.p, (x[1] + y[1]) % self.p)

    def sub(self, x, y):
        if self.degree == 1:
            return (x - y) % self.p
        return ((x[0] - y[0]) % self.p, (x[1] - y[1]) % self.p)

    def mul(self, x, y):
        if self.degree == 1:
            return x * y % self.p
        r = self.ring.mul(x, y)
        return (r[0] % self.p, r[1] % self.p)

    def is_zero(self, x):
        return x == 0 if self.degree == 1 else x == (0, 0)

    def inv(self, x):
        if self.degree == 1:
            return pow(x, -1, self.p)
        n = self.ring.norm(x) % self.p
        c = self.ring.conj(x)
        ni = pow(n, -1, self.p)
        return (c[0] * ni % self.p, c[1] * ni % self.p)

    def frobenius(self, x):
        if self.degree == 1:
            return x
        c = self.ring.conj(x)
        return (c[0] % self.p, c[1] % self.p)

    def elements(self):
        if self.degree == 1:
            return list(range(self.p))
        return [(x, y) for x in range(self.p) for y in range(self.p)]


def reduce_mod(x: QuadInt, F: ResidueField):
    return F.reduce(x)


def residue_field(p: int, d: int) -> ResidueField:
    return ResidueField(split_type(p, d)[1])
