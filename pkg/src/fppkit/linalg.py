"""Exact dense linear algebra over fields and over Z/p^e.

Field routines take lists of rows of field elements (Fraction, QuadElt, or
residue-field PadicElt).  The ``*_mod`` routines work on int64 numpy arrays
over F_p.  Matrices over Z/p^e are numpy object arrays of Python ints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import PrecisionExhausted


# ---------------------------------------------------------------------------
# generic fields


def rref(rows):
    """Reduced row echelon form over a field.

    Returns ``(R, rank, pivots)`` with R a new list of rows.
    """
    R = [list(r) for r in rows]
    if not R:
        return R, 0, []
    nrows, ncols = len(R), len(R[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if R[i][c]), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        pv = R[r][c]
        inv = Fraction(1, pv) if isinstance(pv, int) else 1 / pv
        R[r] = [x * inv for x in R[r]]
        for i in range(nrows):
            if i != r and R[i][c]:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return R, r, pivots


def rank(rows) -> int:
    return rref(rows)[1]


def nullspace(rows, ncols: int | None = None):
    """Basis of {x : M x = 0} over a field, one vector per free column."""
    R, rk, pivots = rref(rows)
    n = ncols if ncols is not None else (len(R[0]) if R else 0)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fcol in free:
        v = [0] * n
        v[fcol] = 1
        for i, pc in enumerate(pivots):
            v[pc] = -R[i][fcol]
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# prime fields, vectorized


def rref_mod(A, p: int):
    """RREF over F_p of an integer matrix; returns ``(R, pivots)``."""
    R = np.array(A, dtype=np.int64) % p
    if R.ndim != 2:
        raise ValueError("need a 2-d matrix")
    nrows, ncols = R.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        R[r] = R[r] * pow(int(R[r, c]), -1, p) % p
        col = R[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            R[nzr] = (R[nzr] - np.outer(col[nzr], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank_mod(A, p: int) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    return len(rref_mod(A, p)[1])


def nullspace_mod(A, p: int) -> np.ndarray:
    """Rows form a basis of the right kernel of A over F_p."""
    A = np.asarray(A)
    ncols = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(ncols, dtype=np.int64)
    R, pivots = rref_mod(A, p)
    free = [c for c in range(ncols) if c not in pivots]
    N = np.zeros((len(free), ncols), dtype=np.int64)
    for k, fc in enumerate(free):
        N[k, fc] = 1
        for i, pc in enumerate(pivots):
            N[k, pc] = (-R[i, fc]) % p
    return N


class ModPSolver:
    """Precomputed elimination of a fixed matrix over F_p.

    ``solve(b)`` returns a particular solution of J x = b (free variables
    zero) or None when inconsistent; ``kernel`` holds a kernel basis.
    """

    def __init__(self, J, p: int):
        J = np.asarray(J, dtype=np.int64) % p
        self.p = p
        m, n = J.shape
        aug = np.concatenate([J, np.eye(m, dtype=np.int64)], axis=1)
        R, piv = rref_mod(aug, p)
        self.pivots = [c for c in piv if c < n]
        r = len(self.pivots)
        self.rank = r
        self.R = R[:r, :n]
        self.T = R[:, n:]
        self.n = n
        self.kernel = nullspace_mod(J, p) if n else np.zeros((0, 0), dtype=np.int64)

    def solve(self, b):
        p = self.p
        tb = self.T.dot(np.asarray(b, dtype=np.int64) % p) % p
        if np.any(tb[self.rank:]):
            return None
        x = np.zeros(self.n, dtype=np.int64)
        for i, c in enumerate(self.pivots):
            x[c] = tb[i]
        return x


# ---------------------------------------------------------------------------
# Z/p^e


def _valuation_int(a: int, p: int, cap: int) -> int:
    if a == 0:
        return cap
    v = 0
    while a % p == 0 and v < cap:
        a //= p
        v += 1
    return v


@dataclass
class SmithData:
    """Diagonalization of M over Z/p^e by valuation-minimal full pivoting."""

    p: int
    e: int
    valuations: list        # one per pivot, non-decreasing, all < e
    perm: list              # position -> original column
    upper: np.ndarray       # rows < s of the column transform (position coords)
    ncols: int

    @property
    def rank(self) -> int:
        return len(self.valuations)

    def kernel_positions(self):
        return range(self.rank, self.ncols)

    def kernel_basis(self) -> list[list[int]]:
        q = self.p**self.e
        s = self.rank
        out = []
        for j in self.kernel_positions():
            y = [0] * self.ncols
            for k in range(s):
                y[self.perm[k]] = int(self.upper[k, j]) % q
            y[self.perm[j]] = 1
            out.append(y)
        return out


def smith_mod(M, p: int, e: int, want_transform: bool = True) -> SmithData:
    q = p**e
    A = np.array(M, dtype=object)
    if A.ndim != 2:
        A = A.reshape(0, 0) if A.size == 0 else A
    A = A % q if A.size else A
    nrows, ncols = A.shape
    perm = list(range(ncols))
    steps = min(nrows, ncols)
    U = np.zeros((steps, ncols), dtype=object) if want_transform else None
    vals = []
    pw = [p**v for v in range(e + 1)]
    for i in range(steps):
        found = None
        col = A[i:, i]
        units = np.nonzero(col % p != 0)[0]
        if units.size:
            found = (i + int(units[0]), i, 0)
        else:
            sub = A[i:, i:]
            for v in range(e):
                hits = np.argwhere(sub % pw[v + 1] != 0)
                if hits.size:
                    found = (i + int(hits[0][0]), i + int(hits[0][1]), v)
                    break
        if found is None:
            break
        pr, pc, v = found
        if pr != i:
            A[[i, pr]] = A[[pr, i]]
        if pc != i:
            A[:, [i, pc]] = A[:, [pc, i]]
            perm[i], perm[pc] = perm[pc], perm[i]
            if want_transform and i:
                U[:i, [i, pc]] = U[:i, [pc, i]]
        pk = pw[v]
        uinv = pow(int(A[i, i]) // pk, -1, q)
        fr = (A[i + 1:, i] // pk) * uinv % q
        nzr = np.nonzero(fr)[0]
        if nzr.size and i + 1 < ncols:
            rows = i + 1 + nzr
            A[rows, i + 1:] = (A[rows, i + 1:] - np.outer(fr[nzr], A[i, i + 1:])) % q
        A[i + 1:, i] = 0
        if i + 1 < ncols:
            fc = (A[i, i + 1:] // pk) * uinv % q
            if want_transform:
                if i:
                    U[:i, i + 1:] = (U[:i, i + 1:] - np.outer(U[:i, i], fc)) % q
                U[i, i + 1:] = (-fc) % q
                U[i, i] = 1
            A[i, i + 1:] = 0
        elif want_transform:
            U[i, i] = 1
        vals.append(v)
    s = len(vals)
    upper = U[:s] if want_transform else np.zeros((0, ncols), dtype=object)
    return SmithData(p, e, vals, perm, upper, ncols)


@dataclass
class PadicNullspace:
    """Nullspace of a matrix over Z/p^e with a margin-based certificate.

    ``dim`` is the nullspace dimension at precision e; it is *certified at
    precision e - margin* when no invariant factor has valuation in
    [e - margin, e).  ``basis`` rows are saturated (each has a unit entry).
    """

    basis: list
    dim: int
    p: int
    e: int
    margin: int
    valuations: list
    certified: bool
    ambiguous: list = field(default_factory=list)

    @property
    def label(self) -> str:
        state = "certified" if self.certified else "NOT certified"
        return f"dim {self.dim} {state} at precision {self.p}^{self.e - self.margin}"

    def valuation_profile(self) -> dict:
        prof: dict = {}
        for v in self.valuations:
            prof[v] = prof.get(v, 0) + 1
        return prof


def padic_nullspace(M, p: int, e: int, margin: int = 3, strict: bool = True,
                    want_basis: bool = True) -> PadicNullspace:
    """Saturated nullspace of M mod p^e with certified dimension.

    Raises PrecisionExhausted (when ``strict``) if some invariant factor has
    valuation in [e - margin, e): the dimension would change under a
    precision drop to e - margin, so it cannot be certified.
    """
    if not e > margin >= 1:
        raise ValueError("need e > margin >= 1")
    A = np.array(M, dtype=object)
    ncols = A.shape[1]
    sd = smith_mod(A, p, e, want_transform=want_basis)
    ambiguous = [v for v in sd.valuations if v >= e - margin]
    certified = not ambiguous
    if strict and not certified:
        raise PrecisionExhausted(
            f"{len(ambiguous)} invariant factor(s) with valuation in [{e - margin}, {e}): "
            f"{ambiguous}; raise the precision or add better-spread points")
    basis = sd.kernel_basis() if want_basis else []
    return PadicNullspace(basis, ncols - sd.rank, p, e, margin, sd.valuations,
                          certified, ambiguous)


# ---------------------------------------------------------------------------
# unramified extensions (Z/p^e)[x]/(f), entries stored coefficient-wise


def ext_mul(A, B, f, q: int):
    """Entrywise product of coefficient stacks A[t], B[t] (t < k) modulo f."""
    k = len(f) - 1
    prod = [0] * (2 * k - 1)
    for i in range(k):
        for j in range(k):
            prod[i + j] = prod[i + j] + A[i] * B[j]
    for d in range(2 * k - 2, k - 1, -1):
        c = prod[d]
        for i in range(k):
            if f[i]:
                prod[d - k + i] = prod[d - k + i] - c * f[i]
    return [x % q for x in prod[:k]]


def smith_ext(M, p: int, e: int, f) -> list:
    """Invariant-factor valuations of a matrix over (Z/p^e)[x]/(f).

    ``M`` has shape (k, rows, cols): coefficient t of every entry.  The ring
    is a truncated DVR with uniformizer p, so valuation-minimal full
    pivoting diagonalizes exactly as over Z/p^e.
    """
    from .arith import PadicElt, PadicRing

    q = p**e
    k = len(f) - 1
    ring = PadicRing(p, e, f)
    A = [np.array(M[t], dtype=object) % q for t in range(k)]
    nrows, ncols = A[0].shape
    pw = [p**v for v in range(e + 1)]
    vals = []
    for i in range(min(nrows, ncols)):
        found = None
        for v in range(e):
            hit = np.zeros(A[0][i:, i:].shape, dtype=bool)
            for t in range(k):
                hit |= (A[t][i:, i:] % pw[v + 1]) != 0
            idx = np.argwhere(hit)
            if idx.size:
                found = (i + int(idx[0][0]), i + int(idx[0][1]), v)
                break
        if found is None:
            break
        pr, pc, v = found
        for t in range(k):
            if pr != i:
                A[t][[i, pr]] = A[t][[pr, i]]
            if pc != i:
                A[t][:, [i, pc]] = A[t][:, [pc, i]]
        pk = pw[v]
        piv = PadicElt(ring, [int(A[t][i, i]) // pk for t in range(k)])
        uinv = piv.inverse().c
        col = [A[t][i + 1:, i] // pk for t in range(k)]
        fr = ext_mul(col, [np.full(col[0].shape, c, dtype=object) for c in uinv], f, q)
        if i + 1 < ncols and nrows > i + 1:
            rowp = [A[t][i, i + 1:] for t in range(k)]
            outer_a = [np.outer(fr[t], np.ones_like(rowp[0])) for t in range(k)]
            outer_b = [np.outer(np.ones_like(fr[0]), rowp[t]) for t in range(k)]
            upd = ext_mul(outer_a, outer_b, f, q)
            for t in range(k):
                A[t][i + 1:, i + 1:] = (A[t][i + 1:, i + 1:] - upd[t]) % q
        for t in range(k):
            A[t][i + 1:, i] = 0
            A[t][i, i + 1:] = 0
        vals.append(v)
    return vals


def ext_nullspace_dim(M, p: int, e: int, f, margin: int = 3, strict: bool = True) -> PadicNullspace:
    """Certified nullspace dimension over the extension ring (no basis)."""
    if not e > margin >= 1:
        raise ValueError("need e > margin >= 1")
    ncols = np.asarray(M[0]).shape[1]
    vals = smith_ext(M, p, e, f)
    ambiguous = [v for v in vals if v >= e - margin]
    if strict and ambiguous:
        raise PrecisionExhausted(
            f"{len(ambiguous)} invariant factor(s) with valuation in [{e - margin}, {e})")
    return PadicNullspace([], ncols - len(vals), p, e, margin, vals, not ambiguous, ambiguous)


def unit_rank(M, p: int, e: int, margin: int = 0) -> int:
    """Number of invariant factors of valuation < e - margin."""
    sd = smith_mod(M, p, e, want_transform=False)
    return sum(1 for v in sd.valuations if v < e - margin)


def echelon_mod(rows, p: int, e: int):
    """RREF over Z/p^e of a saturated basis, using unit pivots only.

    Returns ``(rows, pivots)``; raises PrecisionExhausted if a unit pivot
    cannot be found for some row.
    """
    q = p**e
    R = np.array(rows, dtype=object) % q
    if R.size == 0:
        return R, []
    nrows, ncols = R.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        cand = np.nonzero(R[r:, c] % p != 0)[0]
        if cand.size == 0:
            continue
        piv = r + int(cand[0])
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        R[r] = R[r] * pow(int(R[r, c]), -1, q) % q
        for i in range(nrows):
            if i != r and R[i, c] % q:
                R[i] = (R[i] - R[i, c] * R[r]) % q
        pivots.append(c)
        r += 1
    if r < nrows:
        raise PrecisionExhausted("basis is not saturated: no unit pivot for some row")
    return R, pivots


def expand_extension_rows(M) -> np.ndarray:
    """Split rows over (Z/p^e)[x]/(f) into k scalar rows each.

    A scalar vector v kills a row iff it kills every power-basis coefficient
    row, so the scalar nullspaces agree.
    """
    rows = []
    for row in M:
        k = row[0].ring.k
        for t in range(k):
            rows.append([x.c[t] for x in row])
    return np.array(rows, dtype=object)


# ---------------------------------------------------------------------------
# determinants


def det_bareiss(M):
    """Fraction-free elimination; exact over Z and over fields."""
    A = [list(r) for r in M]
    n = len(A)
    if n == 0:
        return 1
    if any(len(r) != n for r in A):
        raise ValueError("det needs a square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if not A[k][k]:
            swap = next((i for i in range(k + 1, n) if A[i][k]), None)
            if swap is None:
                return 0 * A[0][0]
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = A[i][j] * A[k][k] - A[i][k] * A[k][j]
                A[i][j] = num // prev if isinstance(num, int) else num / prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def det_berkowitz(M):
    """Division-free determinant (Berkowitz); valid over any commutative ring."""
    A = [list(r) for r in M]
    n = len(A)
    if n == 0:
        return 1
    one = A[0][0] * 0 + 1
    zero = A[0][0] * 0
    # characteristic polynomial coefficients of the leading r x r block
    vect = [one, -A[0][0]]
    for r in range(1, n):
        R = A[r][:r]
        C = [A[i][r] for i in range(r)]
        Asub = [row[:r] for row in A[:r]]
        a = A[r][r]
        # Toeplitz column: 1, -a, -R C, -R A C, ...
        q = [one, -a]
        v = C
        for _ in range(r):
            q.append(-sum((R[i] * v[i] for i in range(r)), zero))
            v = [sum((Asub[i][j] * v[j] for j in range(r)), zero) for i in range(r)]
        new = []
        for i in range(r + 2):
            s = zero
            for j in range(min(i, len(vect) - 1) + 1):
                if i - j < len(q):
                    s = s + q[i - j] * vect[j]
            new.append(s)
        vect = new
    d = vect[n]
    return d if n % 2 == 0 else -d


def det(M):
    """Exact determinant of a square matrix over a commutative ring.

    Integers, Fractions and QuadElt use Bareiss.  For Z/p^e (k = 1) the
    integer lifts are reduced, which is exact because det is a polynomial in
    the entries; other rings fall back to Berkowitz.
    """
    from .arith import PadicElt

    A = [list(r) for r in M]
    if not A:
        return 1
    x = A[0][0]
    if isinstance(x, PadicElt):
        ring = x.ring
        if ring.k == 1:
            return ring(det_bareiss([[int(v) for v in row] for row in A]))
        return det_berkowitz(A)
    return det_bareiss(A)
