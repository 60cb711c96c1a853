"""Exact LLL reduction and recognition of Q(sqrt(-7)) numbers from residues."""

from __future__ import annotations

from fractions import Fraction

from .arith import QuadElt, embed_int
from .errors import BadPrime, DependentBasis, NoUnitEntry, RecognitionFailed

DEFAULT_BOUND = 10**6


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def gram_schmidt(basis):
    """Exact Gram-Schmidt data ``(bstar_sq, mu)``."""
    n = len(basis)
    bstar = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    bsq = []
    for i in range(n):
        v = [Fraction(x) for x in basis[i]]
        for j in range(i):
            mu[i][j] = Fraction(_dot(basis[i], bstar[j])) / bsq[j]
            v = [a - mu[i][j] * b for a, b in zip(v, bstar[j])]
        bstar.append(v)
        bsq.append(_dot(v, v))
    return bsq, mu


def lll(basis, delta: Fraction = Fraction(3, 4)) -> list[list[int]]:
    """LLL-reduce a basis of integer row vectors with exact rationals.

    Raises DependentBasis when the rows are linearly dependent.
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta <= 1:
        raise ValueError("delta must lie in (1/4, 1]")
    b = [[int(x) for x in row] for row in basis]
    n = len(b)
    if n == 0:
        return b
    bsq, mu = gram_schmidt(b)
    if any(x == 0 for x in bsq):
        raise DependentBasis("input vectors are linearly dependent")

    def size_reduce(k, j):
        r = round(mu[k][j])
        if r:
            b[k] = [x - r * y for x, y in zip(b[k], b[j])]
            for t in range(j):
                mu[k][t] -= r * mu[j][t]
            mu[k][j] -= r

    k = 1
    while k < n:
        size_reduce(k, k - 1)
        if bsq[k] >= (delta - mu[k][k - 1] ** 2) * bsq[k - 1]:
            for j in range(k - 2, -1, -1):
                size_reduce(k, j)
            k += 1
            continue
        # swap b[k-1], b[k] and update Gram-Schmidt data in place
        m = mu[k][k - 1]
        B = bsq[k] + m * m * bsq[k - 1]
        mu[k][k - 1] = m * bsq[k - 1] / B
        bsq[k] = bsq[k - 1] * bsq[k] / B
        bsq[k - 1] = B
        b[k - 1], b[k] = b[k], b[k - 1]
        for j in range(k - 1):
            mu[k - 1][j], mu[k][j] = mu[k][j], mu[k - 1][j]
        for i in range(k + 1, n):
            t = mu[i][k]
            mu[i][k] = mu[i][k - 1] - m * t
            mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k]
        k = max(k - 1, 1)
    return b


def is_lll_reduced(basis, delta: Fraction = Fraction(3, 4)) -> bool:
    bsq, mu = gram_schmidt(basis)
    n = len(basis)
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    return all(bsq[k] >= (delta - mu[k][k - 1] ** 2) * bsq[k - 1] for k in range(1, n))


def recognize_quad(a: int, s: int, q: int, bound: int = DEFAULT_BOUND) -> QuadElt:
    """Find a small x = (u + v*w)/c with x = a mod q under w -> s.

    Raises RecognitionFailed if the shortest relation found is longer than
    ``bound`` (Euclidean norm), has c = 0, or does not verify.
    """
    a %= q
    s %= q
    red = lll([[q, 0, 0], [-s, 1, 0], [-a, 0, 1]])
    c1, c2, c3 = min(red, key=lambda v: _dot(v, v))
    if c3 == 0 or _dot((c1, c2, c3), (c1, c2, c3)) > bound * bound:
        raise RecognitionFailed(f"no small relation for {a} mod {q}")
    if (c1 + c2 * s + c3 * a) % q:
        raise RecognitionFailed("relation does not verify")
    x = QuadElt(Fraction(-c1, c3), Fraction(-c2, c3))
    try:
        ok = embed_int(x, s, _prime_of(q), q) == a
    except BadPrime:
        ok = False
    if not ok:
        raise RecognitionFailed("relation denominator is not invertible mod q")
    return x


def _prime_of(q: int) -> int:
    """Smallest prime factor of q (q is a prime power here)."""
    p = 2
    while q % p:
        p += 1
    return p


def rationalize_vector(v, s: int, q: int, bound: int = DEFAULT_BOUND) -> list[QuadElt]:
    """Scale v so its first unit entry is 1, then recognize each entry."""
    p = _prime_of(q)
    v = [int(x) % q for x in v]
    lead = next((x for x in v if x % p), None)
    if lead is None:
        raise NoUnitEntry("vector has no unit entry")
    inv = pow(lead, -1, q)
    scaled = [x * inv % q for x in v]
    out = [recognize_quad(x, s, q, bound) for x in scaled]
    if [embed_int(x, s, p, q) for x in out] != scaled:
        raise RecognitionFailed("recognized vector does not re-embed")
    return out
