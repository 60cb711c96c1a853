"""Sparse multivariate polynomials, the C7 x| C3 coordinate action and the
equation-file format.

Monomials are exponent tuples.  The fixed order everywhere is graded
lexicographic, descending, with U0 > U1 > ... > U9: for quadrics in ten
variables that is U0^2, U0*U1, ..., U0*U9, U1^2, ..., U9^2.

Coefficients are duck-typed: ints, Fractions, :class:`QuadElt` or
:class:`PadicElt` all work, as long as a single polynomial does not mix
incompatible rings.  "Working" polynomials used in the p-adic pipelines
carry plain int coefficients and are evaluated with :meth:`Poly.eval_mod`.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass

import numpy as np

from .arith import QuadElt
from .errors import DegreeMismatch, NoSeventhRoot, ParseError

Mono = tuple


def grlex_key(m: Mono):
    return (sum(m), m)


def monomial_basis(degree: int, nvars: int) -> list[Mono]:
    """All monomials of the given degree in grlex-descending order."""
    if degree < 0 or nvars < 1:
        raise ValueError("need degree >= 0 and nvars >= 1")

    def rec(d, n):
        if n == 1:
            yield (d,)
            return
        for a in range(d, -1, -1):
            for rest in rec(d - a, n - 1):
                yield (a,) + rest

    return list(rec(degree, nvars))


def mono_mul(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


class Poly:
    """Sparse polynomial: ``nvars`` and a mapping monomial -> coefficient.

    Zero coefficients are never stored.  Treat instances as immutable.
    """

    __slots__ = ("nvars", "terms", "_sparse")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        clean = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for m, c in items:
                m = tuple(m)
                if len(m) != nvars:
                    raise ValueError("monomial length does not match nvars")
                if m in clean:
                    c = clean[m] + c
                if c:
                    clean[m] = c
                else:
                    clean.pop(m, None)
        self.terms = clean
        self._sparse = None

    # constructors
    @classmethod
    def var(cls, i: int, nvars: int, coeff=1) -> Poly:
        m = [0] * nvars
        m[i] = 1
        return cls(nvars, {tuple(m): coeff})

    @classmethod
    def const(cls, c, nvars: int) -> Poly:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, m: Mono, coeff=1) -> Poly:
        return cls(len(m), {tuple(m): coeff})

    @classmethod
    def linear(cls, coeffs) -> Poly:
        n = len(coeffs)
        return cls(n, {tuple(int(i == j) for j in range(n)): c
                       for i, c in enumerate(coeffs)})

    # structure
    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def monomials(self) -> list[Mono]:
        return sorted(self.terms, key=grlex_key, reverse=True)

    def sorted_terms(self):
        return [(m, self.terms[m]) for m in self.monomials()]

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(m) for m in self.terms}) <= 1

    def coeff(self, m: Mono):
        return self.terms.get(tuple(m), 0)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Poly({self.nvars}, {self.sorted_terms()!r})"

    # arithmetic
    def _lift(self, other) -> Poly:
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("nvars mismatch")
            return other
        return Poly.const(other, self.nvars)

    def __add__(self, other):
        o = self._lift(other)
        out = dict(self.terms)
        for m, c in o.terms.items():
            out[m] = out[m] + c if m in out else c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(self.nvars, {m: c * other for m, c in self.terms.items()})
        return self.mul_truncated(other, None)

    def __rmul__(self, other):
        return Poly(self.nvars, {m: other * c for m, c in self.terms.items()})

    def mul_truncated(self, other: Poly, maxdeg: int | None) -> Poly:
        if other.nvars != self.nvars:
            raise ValueError("nvars mismatch")
        out: dict = {}
        for m1, c1 in self.terms.items():
            d1 = sum(m1)
            for m2, c2 in other.terms.items():
                if maxdeg is not None and d1 + sum(m2) > maxdeg:
                    continue
                m = mono_mul(m1, m2)
                v = c1 * c2
                out[m] = out[m] + v if m in out else v
        return Poly(self.nvars, out)

    def __pow__(self, n: int):
        out = Poly.const(1, self.nvars)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def truncate(self, maxdeg: int) -> Poly:
        return Poly(self.nvars, {m: c for m, c in self.terms.items() if sum(m) <= maxdeg})

    def homogeneous_part(self, d: int) -> Poly:
        return Poly(self.nvars, {m: c for m, c in self.terms.items() if sum(m) == d})

    def map_coeffs(self, fn) -> Poly:
        return Poly(self.nvars, {m: fn(c) for m, c in self.terms.items()})

    def reduce_mod(self, q: int) -> Poly:
        return Poly(self.nvars, {m: c % q for m, c in self.terms.items()})

    def diff(self, i: int) -> Poly:
        out = {}
        for m, c in self.terms.items():
            a = m[i]
            if a:
                mm = list(m)
                mm[i] -= 1
                out[tuple(mm)] = c * a
        return Poly(self.nvars, out)

    def embed(self, nvars: int, positions) -> Poly:
        """Rename variable i to ``positions[i]`` inside ``nvars`` variables."""
        out = {}
        for m, c in self.terms.items():
            mm = [0] * nvars
            for i, a in enumerate(m):
                if a:
                    mm[positions[i]] += a
            out[tuple(mm)] = c
        return Poly(nvars, out)

    # evaluation
    def _sparse_terms(self):
        if self._sparse is None:
            self._sparse = [(c, tuple((i, a) for i, a in enumerate(m) if a))
                            for m, c in self.terms.items()]
        return self._sparse

    def eval(self, point):
        """Exact evaluation over whatever ring the point lives in."""
        if len(point) != self.nvars:
            raise ValueError("point has wrong length")
        total = 0
        cache: dict = {}
        for c, sp in self._sparse_terms():
            t = c
            for i, a in sp:
                key = (i, a)
                if key not in cache:
                    cache[key] = point[i] ** a
                t = t * cache[key]
            total = total + t
        return total

    __call__ = eval

    def eval_mod(self, point, q: int) -> int:
        total = 0
        cache: dict = {}
        for c, sp in self._sparse_terms():
            t = c
            for i, a in sp:
                key = (i, a)
                v = cache.get(key)
                if v is None:
                    v = cache[key] = pow(point[i], a, q)
                t = t * v % q
            total += t
        return total % q

    def eval_many(self, points: np.ndarray, q: int) -> np.ndarray:
        """Evaluate at each row of an object array of ints, mod q."""
        pts = np.asarray(points, dtype=object)
        out = np.zeros(pts.shape[0], dtype=object)
        cache: dict = {}
        for c, sp in self._sparse_terms():
            col = np.full(pts.shape[0], c % q, dtype=object)
            for i, a in sp:
                key = (i, a)
                if key not in cache:
                    cache[key] = np.array([pow(int(v), a, q) for v in pts[:, i]],
                                          dtype=object)
                col = col * cache[key] % q
            out = out + col
        return out % q

    def gradient(self, point) -> list:
        return [self.diff(i).eval(point) for i in range(self.nvars)]

    def substitute(self, images, maxdeg: int | None = None) -> Poly:
        """f(images[0], ..., images[n-1]), optionally truncated past maxdeg."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        m_vars = images[0].nvars
        powers: dict = {}

        def pw(i, a):
            key = (i, a)
            if key not in powers:
                if a == 1:
                    powers[key] = images[i]
                else:
                    powers[key] = pw(i, a - 1).mul_truncated(images[i], maxdeg)
            return powers[key]

        total = Poly(m_vars)
        for m, c in self.terms.items():
            t = Poly.const(c, m_vars)
            for i, a in enumerate(m):
                if a:
                    t = t.mul_truncated(pw(i, a), maxdeg)
            total = total + t
        return total


# ---------------------------------------------------------------------------
# the automorphism group C7 x| C3 acting on U0..U9

G3_PERM = (0, 2, 3, 1, 5, 6, 4, 8, 9, 7)
G7_WEIGHTS = (0, 6, 5, 3, 1, 2, 4, 1, 2, 4)


@dataclass(frozen=True)
class GroupElt:
    """Point map x -> y with y_i = zeta^zexp[i] * x_{perm[i]}.

    ``g3`` is the coordinate permutation and ``g7`` the diagonal zeta
    scaling; polynomials transform by ``g.f = f o g^-1``.
    """

    perm: tuple
    zexp: tuple

    @classmethod
    def identity(cls, n: int = 10) -> GroupElt:
        return cls(tuple(range(n)), (0,) * n)

    def __matmul__(self, other: GroupElt) -> GroupElt:
        """Composition: (self @ other)(x) = self(other(x))."""
        perm = tuple(other.perm[self.perm[i]] for i in range(len(self.perm)))
        z = tuple((self.zexp[i] + other.zexp[self.perm[i]]) % 7
                  for i in range(len(self.perm)))
        return GroupElt(perm, z)

    def inverse(self) -> GroupElt:
        n = len(self.perm)
        rho = [0] * n
        for i, j in enumerate(self.perm):
            rho[j] = i
        return GroupElt(tuple(rho), tuple((-self.zexp[rho[i]]) % 7 for i in range(n)))

    def __pow__(self, k: int) -> GroupElt:
        g = self if k >= 0 else self.inverse()
        out = GroupElt.identity(len(self.perm))
        for _ in range(abs(k)):
            out = out @ g
        return out

    def needs_zeta(self) -> bool:
        return any(self.zexp)

    def apply_point(self, x, zeta=None) -> list:
        if self.needs_zeta() and zeta is None:
            raise NoSeventhRoot("this group element needs a 7th root of unity")
        zp = [1] * 7
        if zeta is not None:
            for j in range(1, 7):
                zp[j] = zp[j - 1] * zeta
        return [zp[self.zexp[i]] * x[self.perm[i]] if self.zexp[i] else x[self.perm[i]]
                for i in range(len(self.perm))]

    def apply_poly(self, f: Poly, zeta=None) -> Poly:
        inv = self.inverse()
        if inv.needs_zeta() and zeta is None:
            raise NoSeventhRoot("this group element needs a 7th root of unity")
        zp = [1] * 7
        if zeta is not None:
            for j in range(1, 7):
                zp[j] = zp[j - 1] * zeta
        out = {}
        for m, c in f.terms.items():
            new = [0] * f.nvars
            s = 0
            for i, a in enumerate(m):
                if a:
                    new[inv.perm[i]] += a
                    s += inv.zexp[i] * a
            out[tuple(new)] = c * zp[s % 7] if s % 7 else c
        return Poly(f.nvars, out)


G3 = GroupElt(G3_PERM, (0,) * 10)
G7 = GroupElt(tuple(range(10)), G7_WEIGHTS)


def group_element(i: int, j: int) -> GroupElt:
    """g3^i o g7^j."""
    return (G3 ** i) @ (G7 ** j)


def g3_act(f: Poly) -> Poly:
    return G3.apply_poly(f)


def g7_act(f: Poly, zeta) -> Poly:
    """g7 . f; the coefficients of f must live in the ring of ``zeta``."""
    if zeta is None:
        raise NoSeventhRoot("g7 needs a primitive 7th root of unity")
    return G7.apply_poly(f, zeta)


def g7_weight(m: Mono, weights=G7_WEIGHTS) -> int:
    if len(m) != len(weights):
        raise ValueError("g7_weight needs a monomial in 10 variables")
    return sum(a * w for a, w in zip(m, weights)) % 7


# ---------------------------------------------------------------------------
# equation files

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))")
_VAR = re.compile(r"^([A-Z])(\d+)$")

VAR_PREFIX_DEFAULTS = {"U": (10, 0), "Z": (6, 1)}


def var_names(prefix: str = "U", nvars: int | None = None) -> list[str]:
    n, base = VAR_PREFIX_DEFAULTS.get(prefix, (nvars or 0, 0))
    n = nvars or n
    return [f"{prefix}{i + base}" for i in range(n)]


class _Parser:
    def __init__(self, text, lineno, nvars, prefix):
        self.text, self.lineno = text, lineno
        self.nvars, self.prefix = nvars, prefix
        self.toks = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if not m or m.end() == pos:
                while stripped[pos].isspace():
                    pos += 1
                raise ParseError(f"unexpected character {stripped[pos]!r}", lineno, pos + 1)
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text) + 1)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def error(self, msg):
        raise ParseError(msg, self.lineno, self.peek()[2])

    def parse(self) -> Poly:
        p = self.expr()
        if self.i != len(self.toks):
            self.error(f"unexpected token {self.peek()[1]!r}")
        return p

    def expr(self) -> Poly:
        sign = 1
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        out = self.term() * sign
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            t = self.term()
            out = out + t if op == "+" else out - t
        return out

    def term(self) -> Poly:
        out = self.power()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            rhs = self.power()
            if op == "*":
                out = out * rhs
            else:
                if rhs.degree() > 0 or rhs.is_zero():
                    self.error("division only by nonzero constants")
                out = out * (1 / QuadElt.coerce(rhs.coeff((0,) * self.nvars)))
        return out

    def power(self) -> Poly:
        base = self.atom()
        if self.peek() == ("op", "^", self.peek()[2]):
            self.take()
            kind, val, _ = self.take()
            if kind != "num":
                self.error("exponent must be an integer")
            base = base ** int(val)
        return base

    def atom(self) -> Poly:
        kind, val, col = self.take()
        n = self.nvars
        if kind == "num":
            return Poly.const(QuadElt(int(val)), n)
        if kind == "name":
            if val == "w":
                return Poly.const(QuadElt(0, 1), n)
            m = _VAR.match(val)
            if not m:
                raise ParseError(f"unknown name {val!r}", self.lineno, col)
            prefix, idx = m.group(1), int(m.group(2))
            if self.prefix is None:
                self.prefix = prefix
            if prefix != self.prefix:
                raise ParseError(f"mixed variable prefixes {self.prefix} and {prefix}",
                                 self.lineno, col)
            base = VAR_PREFIX_DEFAULTS.get(prefix, (n, 0))[1]
            j = idx - base
            if not 0 <= j < n:
                raise ParseError(f"variable {val} out of range", self.lineno, col)
            return Poly.var(j, n, QuadElt(1))
        if kind == "op" and val == "(":
            inner = self.expr()
            if self.take()[1] != ")":
                raise ParseError("missing ')'", self.lineno, col)
            return inner
        raise ParseError(f"unexpected token {val!r}", self.lineno, col)


def _detect_prefix(text: str):
    for m in re.finditer(r"\b([A-Z])\d+\b", text):
        return m.group(1)
    return None


def parse_equations(text: str, nvars: int | None = None, prefix: str | None = None) -> list[Poly]:
    """Parse an equation file into polynomials over Q(sqrt(-7))."""
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    prefix = prefix or _detect_prefix(body) or "U"
    if nvars is None:
        nvars = VAR_PREFIX_DEFAULTS.get(prefix, (10, 0))[0]
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        f = _Parser(line, lineno, nvars, prefix).parse()
        if not f.is_homogeneous():
            raise DegreeMismatch("inhomogeneous polynomial", lineno, 1)
        out.append(f)
    return out


def format_coeff(c) -> str:
    c = QuadElt.coerce(c)
    if c.is_rational():
        a = c.a
        return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
    den = c.denominator()
    u, v = int(c.a * den), int(c.b * den)
    sign = "+" if v >= 0 else "-"
    core = f"({u} {sign} {abs(v)}*w)"
    return core if den == 1 else f"{core}/{den}"


def format_mono(m: Mono, names) -> str:
    parts = [n if a == 1 else f"{n}^{a}" for n, a in zip(names, m) if a]
    return "*".join(parts)


def serialize_poly(f: Poly, names=None) -> str:
    names = names or var_names("U", f.nvars)
    if f.is_zero():
        return "0"
    chunks = []
    for m, c in f.sorted_terms():
        c = QuadElt.coerce(c)
        mono = format_mono(m, names)
        neg = c.is_rational() and c.a < 0
        mag = -c if neg else c
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{format_coeff(mag)}*{mono}"
        else:
            body = format_coeff(mag)
        if not chunks:
            chunks.append(("-" if neg else "") + body)
        else:
            chunks.append(("- " if neg else "+ ") + body)
    return " ".join(chunks)


def serialize_equations(polys, names=None, header: str | None = None) -> str:
    lines = []
    if header:
        lines += [f"# {h}" for h in header.splitlines()]
    lines += [serialize_poly(f, names) for f in polys]
    return "\n".join(lines) + "\n"


def orbit_sums(nvars: int = 10) -> list[Poly]:
    """U0, U1+U2+U3, U4+U5+U6, U7+U8+U9: the g3-orbit sums spanning the cut ansatz."""
    blocks = [(0,), (1, 2, 3), (4, 5, 6), (7, 8, 9)]
    return [Poly.linear([1 if i in b else 0 for i in range(nvars)]) for b in blocks]


def count_monomials(degree: int, nvars: int) -> int:
    return math.comb(degree + nvars - 1, nvars - 1)


def monomial_matrix(points: np.ndarray, basis, q: int) -> np.ndarray:
    """Rows = points, columns = monomials of ``basis``, entries mod q."""
    pts = np.asarray(points, dtype=object)
    n = pts.shape[1]
    maxdeg = max(sum(m) for m in basis)
    pw = [[np.ones(pts.shape[0], dtype=object)] for _ in range(n)]
    for i in range(n):
        col = pts[:, i] % q
        for _ in range(maxdeg):
            pw[i].append(pw[i][-1] * col % q)
    out = np.empty((pts.shape[0], len(basis)), dtype=object)
    for j, m in enumerate(basis):
        col = np.ones(pts.shape[0], dtype=object)
        for i, a in enumerate(m):
            if a:
                col = col * pw[i][a] % q
        out[:, j] = col
    return out


def all_group_elements():
    return [group_element(i, j) for i, j in itertools.product(range(3), range(7))]
