"""Exact arithmetic: Q(sqrt(-7)), prime fields, small extensions and truncated p-adic rings.

Rationals are :class:`fractions.Fraction`.  Finite fields are the special case
``e = 1`` of :class:`PadicRing`, so ``PadicRing(11, 1, f)`` is F_{11^3} when f
is an irreducible cubic.  All values are immutable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import BadPrime, NoSeventhRoot, NotAResidue, Ramified

Rat = Fraction

DEFAULT_PRECISION = 21


# ---------------------------------------------------------------------------
# Q(sqrt(-7))


def _rat(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class QuadElt:
    """a + b*w with w^2 = -7 and a, b rational."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", _rat(self.a))
        object.__setattr__(self, "b", _rat(self.b))

    @staticmethod
    def coerce(x) -> QuadElt:
        if isinstance(x, QuadElt):
            return x
        if isinstance(x, (int, Fraction)):
            return QuadElt(x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to QuadElt")

    def __add__(self, other):
        try:
            o = QuadElt.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadElt(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QuadElt(-self.a, -self.b)

    def __sub__(self, other):
        try:
            o = QuadElt.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadElt(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuadElt(self.a * other, self.b * other)
        if not isinstance(other, QuadElt):
            return NotImplemented
        return QuadElt(self.a * other.a - 7 * self.b * other.b,
                       self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def conjugate(self) -> QuadElt:
        return QuadElt(self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a + 7 * self.b * self.b

    def inverse(self) -> QuadElt:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("QuadElt division by zero")
        return QuadElt(self.a / n, -self.b / n)

    def __truediv__(self, other):
        try:
            o = QuadElt.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return QuadElt.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = QuadElt(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, QuadElt):
            return self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b)) if self.b else hash(self.a)

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self) -> bool:
        return self.b == 0

    def denominator(self) -> int:
        return math.lcm(self.a.denominator, self.b.denominator)

    def height(self) -> int:
        """max(|u|, |v|, c) for the reduced form (u + v*w)/c."""
        c = self.denominator()
        u, v = int(self.a * c), int(self.b * c)
        g = math.gcd(math.gcd(u, v), c)
        return max(abs(u), abs(v), c) // g

    def __repr__(self):
        return f"QuadElt({self.a}, {self.b})"

    def __str__(self):
        return serialize_quad(self)


W = QuadElt(0, 1)


def serialize_quad(x: QuadElt) -> str:
    """Report format ``(a_num/a_den, b_num/b_den)``."""
    return (f"({x.a.numerator}/{x.a.denominator}, "
            f"{x.b.numerator}/{x.b.denominator})")


_QUAD_RE = re.compile(r"^\(\s*(-?\d+)\s*/\s*(\d+)\s*,\s*(-?\d+)\s*/\s*(\d+)\s*\)$")


def parse_quad(text: str) -> QuadElt:
    m = _QUAD_RE.match(text.strip())
    if not m:
        raise ValueError(f"bad QuadElt literal {text!r}")
    an, ad, bn, bd = map(int, m.groups())
    return QuadElt(Fraction(an, ad), Fraction(bn, bd))


# ---------------------------------------------------------------------------
# polynomial helpers over Z/m (coefficient lists, low degree first)


def _trim(f):
    f = list(f)
    while len(f) > 1 and f[-1] == 0:
        f.pop()
    return f


def _pmul(f, g, m):
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % m
    return out


def _pmod(f, g, m):
    """f mod g over Z/m, g monic."""
    f = [c % m for c in f]
    dg = len(g) - 1
    for i in range(len(f) - 1, dg - 1, -1):
        c = f[i]
        if c:
            for j in range(dg + 1):
                f[i - dg + j] = (f[i - dg + j] - c * g[j]) % m
    return _trim(f[:dg] if dg else [0])


def _pgcd(f, g, p):
    f, g = _trim([c % p for c in f]), _trim([c % p for c in g])
    while g != [0]:
        inv = pow(g[-1], -1, p)
        g = [c * inv % p for c in g]
        f, g = g, _pmod(f, g, p)
    return f


def _ppowmod(base, n, f, p):
    out, b = [1], _pmod(base, f, p)
    while n:
        if n & 1:
            out = _pmod(_pmul(out, b, p), f, p)
        b = _pmod(_pmul(b, b, p), f, p)
        n >>= 1
    return out


def is_irreducible(f, p: int) -> bool:
    """Ben-Or test for a monic polynomial over F_p (coefficients low first)."""
    k = len(f) - 1
    if k <= 0:
        return False
    x = [0, 1]
    h = x
    for _ in range(k // 2):
        h = _ppowmod(h, p, f, p)
        diff = list(h) + [0] * (2 - len(h)) if len(h) < 2 else list(h)
        diff[1] = (diff[1] - 1) % p
        if len(_pgcd(f, _trim(diff), p)) > 1:
            return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple:
    """First monic irreducible of degree k over F_p, enumerating
    (c0, ..., c_{k-1}) with c0 the fastest-varying digit."""
    if k == 1:
        return (0, 1)
    for idx in range(p**k):
        coeffs, n = [], idx
        for _ in range(k):
            coeffs.append(n % p)
            n //= p
        f = tuple(coeffs) + (1,)
        if f[0] and is_irreducible(f, p):
            return f
    raise ValueError("no irreducible polynomial found")


# Versioned constants: defining polynomials of the unramified extensions used
# by the pipelines.  Changing an entry changes every serialized extension point.
DEFINING_POLYS_VERSION = 1
DEFINING_POLYS = {
    (11, 2): (1, 0, 1),       # x^2 + 1
    (11, 3): (4, 1, 0, 1),    # x^3 + x + 4
    (23, 3): (3, 1, 0, 1),    # x^3 + x + 3
    (43, 1): (0, 1),
}


def defining_poly(p: int, k: int) -> tuple:
    if k == 1:
        return (0, 1)
    return DEFINING_POLYS.get((p, k)) or smallest_irreducible(p, k)


# ---------------------------------------------------------------------------
# (Z/p^e)[x]/(f)


class PadicRing:
    """(Z/p^e)[x]/(f) with f monic of degree k and irreducible mod p."""

    __slots__ = ("p", "e", "k", "f", "q")

    def __init__(self, p: int, e: int = 1, f=None):
        if e < 1:
            raise ValueError("precision must be >= 1")
        f = tuple(f) if f is not None else (0, 1)
        if f[-1] != 1:
            raise ValueError("defining polynomial must be monic")
        self.p, self.e, self.f = p, e, f
        self.k = len(f) - 1
        self.q = p**e

    @classmethod
    def extension(cls, p: int, k: int, e: int = 1) -> PadicRing:
        return cls(p, e, defining_poly(p, k))

    def _key(self):
        return (self.p, self.e, self.f)

    def __eq__(self, other):
        return isinstance(other, PadicRing) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"PadicRing(p={self.p}, e={self.e}, k={self.k})"

    def __call__(self, x) -> PadicElt:
        if isinstance(x, PadicElt):
            if x.ring == self:
                return x
            if x.ring.p == self.p and x.ring.f == self.f:
                return PadicElt(self, x.c)
            raise ValueError("incompatible rings")
        if isinstance(x, int):
            return PadicElt(self, (x,) + (0,) * (self.k - 1))
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise BadPrime(f"{self.p} divides denominator of {x}")
            return self(x.numerator * pow(x.denominator, -1, self.q))
        if isinstance(x, (tuple, list)):
            if len(x) != self.k:
                raise ValueError("wrong coefficient count")
            return PadicElt(self, tuple(x))
        raise TypeError(f"cannot coerce {type(x).__name__}")

    @property
    def zero(self) -> PadicElt:
        return self(0)

    @property
    def one(self) -> PadicElt:
        return self(1)

    def gen(self) -> PadicElt:
        if self.k == 1:
            return self(-self.f[0])
        return self(tuple(1 if i == 1 else 0 for i in range(self.k)))

    def with_precision(self, e: int) -> PadicRing:
        return PadicRing(self.p, e, self.f)

    def residue_field(self) -> PadicRing:
        return self.with_precision(1)

    def order(self) -> int:
        """Size of the residue field."""
        return self.p**self.k

    def elements(self):
        """All elements (only sensible for small finite fields)."""
        total = self.q**self.k
        for idx in range(total):
            cs = []
            for _ in range(self.k):
                cs.append(idx % self.q)
                idx //= self.q
            yield PadicElt(self, tuple(cs))


class PadicElt:
    """Element of a :class:`PadicRing`; coefficients on the power basis."""

    __slots__ = ("ring", "c")

    def __init__(self, ring: PadicRing, coeffs):
        q = ring.q
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "c", tuple(int(v) % q for v in coeffs))

    def __setattr__(self, *_):
        raise AttributeError("PadicElt is immutable")

    def _coerce(self, other):
        if isinstance(other, PadicElt):
            if other.ring != self.ring:
                raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return PadicElt(self.ring, [a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return PadicElt(self.ring, [-a for a in self.c])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return PadicElt(self.ring, [a - b for a, b in zip(self.c, o.c)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        r = self.ring
        if r.k == 1:
            return PadicElt(r, (self.c[0] * o.c[0],))
        prod = [0] * (2 * r.k - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    prod[i + j] += a * b
        f, k = r.f, r.k
        for d in range(2 * k - 2, k - 1, -1):
            c = prod[d]
            if c:
                for i in range(k):
                    prod[d - k + i] -= c * f[i]
        return PadicElt(r, prod[:k])

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = self.ring.one, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def valuation(self) -> int:
        """min p-adic valuation of the coefficients, capped at e."""
        p, e = self.ring.p, self.ring.e
        best = e
        for a in self.c:
            if a:
                v = 0
                while a % p == 0:
                    a //= p
                    v += 1
                best = min(best, v)
        return best

    def is_unit(self) -> bool:
        return any(a % self.ring.p for a in self.c)

    def inverse(self) -> PadicElt:
        r = self.ring
        if not self.is_unit():
            raise ZeroDivisionError(f"{self} is not a unit")
        if r.k == 1:
            return PadicElt(r, (pow(self.c[0], -1, r.q),))
        fld = r.residue_field()
        y = PadicElt(r, (PadicElt(fld, self.c) ** (fld.order() - 2)).c)
        prec = 1
        while prec < r.e:
            y = y * (2 - self * y)
            prec *= 2
        return y

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.ring(other) * self.inverse()

    def __eq__(self, other):
        if isinstance(other, PadicElt):
            return self.ring == other.ring and self.c == other.c
        if isinstance(other, (int, Fraction)):
            try:
                return self.c == self.ring(other).c
            except BadPrime:
                return False
        return NotImplemented

    def __hash__(self):
        if self.ring.k == 1:
            return hash(self.c[0])
        return hash(self.c)

    def __bool__(self):
        return any(self.c)

    def __int__(self):
        if self.ring.k != 1:
            raise TypeError("extension element has no integer value")
        return self.c[0]

    @property
    def value(self) -> int:
        return int(self)

    def reduce(self, e: int) -> PadicElt:
        return PadicElt(self.ring.with_precision(e), self.c)

    def frobenius(self) -> PadicElt:
        if self.ring.e != 1:
            raise ValueError("Frobenius is only defined on the residue field here")
        return self ** self.ring.p

    def __repr__(self):
        return f"PadicElt({serialize_padic(self)})"


def serialize_padic(x: PadicElt) -> str:
    """Report format ``p^e:k:[c0,c1,...]``."""
    r = x.ring
    return f"{r.p}^{r.e}:{r.k}:[{','.join(str(v) for v in x.c)}]"


_PADIC_RE = re.compile(r"^(\d+)\^(\d+):(\d+):\[([-\d,\s]*)\]$")


def parse_padic(text: str, f=None) -> PadicElt:
    m = _PADIC_RE.match(text.strip())
    if not m:
        raise ValueError(f"bad PadicElt literal {text!r}")
    p, e, k = int(m[1]), int(m[2]), int(m[3])
    coeffs = [int(v) for v in m[4].split(",") if v.strip()]
    ring = PadicRing(p, e, f if f is not None else defining_poly(p, k))
    if ring.k != k:
        raise ValueError("defining polynomial degree does not match")
    return ring(coeffs)


# ---------------------------------------------------------------------------
# square roots, embeddings, CRT


def sqrt_mod_prime(a: int, p: int) -> int:
    """Smallest square root of a mod odd prime p (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        raise NotAResidue(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
    else:
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while pow(z, (p - 1) // 2, p) != p - 1:
            z += 1
        m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return min(r, p - r)


def hensel_sqrt(a, p: int | None = None, e: int | None = None,
                branch: str = "small") -> PadicElt:
    """Square root of a unit of Z/p^e, Hensel-lifted from a root mod p.

    ``a`` is a k=1 PadicElt, or an int together with ``p`` and ``e``.
    ``branch`` picks the root mod p: ``"small"`` (least representative in
    [0, p)) or ``"large"``.
    """
    if isinstance(a, PadicElt):
        ring = a.ring
        if ring.k != 1:
            raise ValueError("hensel_sqrt needs k = 1")
        val = a.c[0]
    else:
        ring = PadicRing(p, e if e is not None else DEFAULT_PRECISION)
        val = a % ring.q
    p = ring.p
    if p == 2:
        raise ValueError("p must be odd")
    if val % p == 0:
        raise Ramified(f"{a} is not a unit mod {p}")
    r = sqrt_mod_prime(val, p)
    if branch == "large":
        r = p - r
    elif branch != "small":
        raise ValueError(f"unknown branch {branch!r}")
    x, q, prec = r, ring.q, 1
    while prec < ring.e:
        prec = min(2 * prec, ring.e)
        m = p**prec
        x = (x - (x * x - val) * pow(2 * x, -1, m)) % m
    return ring(x)


def embed_quad(x: QuadElt, sqrt_m7: PadicElt) -> PadicElt:
    """Image of a + b*w under w -> sqrt_m7 in the ring of ``sqrt_m7``."""
    ring = sqrt_m7.ring
    x = QuadElt.coerce(x)
    for part in (x.a, x.b):
        if part.denominator % ring.p == 0:
            raise BadPrime(f"{ring.p} divides a denominator of {x}")
    return ring(x.a) + ring(x.b) * sqrt_m7


def embed_int(x, s: int, p: int, q: int) -> int:
    """Integer fast path of :func:`embed_quad` (s = sqrt(-7) mod q)."""
    if isinstance(x, int):
        return x % q
    if isinstance(x, Fraction):
        if x.denominator % p == 0:
            raise BadPrime(f"{p} divides the denominator of {x}")
        return x.numerator * pow(x.denominator, -1, q) % q
    x = QuadElt.coerce(x)
    if x.a.denominator % p == 0 or x.b.denominator % p == 0:
        raise BadPrime(f"{p} divides a denominator of {x}")
    a = x.a.numerator * pow(x.a.denominator, -1, q)
    b = x.b.numerator * pow(x.b.denominator, -1, q)
    return (a + b * s) % q


def crt_pair(x: int, m1: int, y: int, m2: int) -> tuple[int, int]:
    """Combine x mod m1 and y mod m2 (coprime) into one residue mod m1*m2."""
    if math.gcd(m1, m2) != 1:
        raise ValueError("moduli must be coprime")
    t = (y - x) * pow(m1, -1, m2) % m2
    return (x + m1 * t) % (m1 * m2), m1 * m2


# ---------------------------------------------------------------------------
# roots of unity


@lru_cache(maxsize=None)
def _seventh_root_residue(p: int, f: tuple, sqrt_m7_residue: int | None):
    fld = PadicRing(p, 1, f)
    n = fld.order() - 1
    if n % 7:
        raise NoSeventhRoot(f"7 does not divide {fld.order()} - 1")
    for x in fld.elements():
        if not x:
            continue
        z = x ** (n // 7)
        if z != 1:
            break
    roots = [z**j for j in range(1, 7)]
    if sqrt_m7_residue is not None:
        target = (sqrt_m7_residue - 1) * pow(2, -1, p) % p
        roots = [r for r in roots if (r + r**2 + r**4) == target]
        if not roots:
            raise ValueError("no seventh root matches the sqrt(-7) branch")
    return min(roots, key=lambda r: r.c).c


def seventh_root_of_unity(ring: PadicRing, sqrt_m7: int | None = None) -> PadicElt:
    """A fixed primitive 7th root of unity zeta in ``ring``.

    With ``sqrt_m7`` given, zeta is chosen so that zeta + zeta^2 + zeta^4 =
    (-1 + sqrt(-7))/2, the Gauss-sum identity of exp(2 pi i/7); this pins zeta
    up to zeta -> zeta^2 -> zeta^4.  The residue is then Newton-lifted.
    """
    s = None if sqrt_m7 is None else int(sqrt_m7) % ring.p
    c = _seventh_root_residue(ring.p, ring.f, s)
    z = ring(c)
    prec = 1
    while prec < ring.e:
        z = z - (z**7 - 1) / (7 * z**6)
        prec *= 2
    return z
