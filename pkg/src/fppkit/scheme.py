"""Projective schemes given by equation lists.

Covers F_p point enumeration (pools), Jacobian ranks, the nonreduced-cut
test and truncated formal neighborhoods at smooth points.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import linalg
from .arith import DEFAULT_PRECISION, PadicElt, QuadElt, embed_int, hensel_sqrt
from .errors import (BudgetExceeded, EmptySample, InconsistentLift, NotOnScheme,
                     SingularPoint)
from .poly import Poly, serialize_equations

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 3 * 10**10


# ---------------------------------------------------------------------------
# embedding Q(sqrt(-7)) -> Z/p^e


@dataclass(frozen=True)
class Embedding:
    """Q(sqrt(-7)) -> Z/p^e with sqrt(-7) sent to the chosen branch."""

    p: int
    e: int = DEFAULT_PRECISION
    branch: str = "small"

    @cached_property
    def q(self) -> int:
        return self.p**self.e

    @cached_property
    def s(self) -> int:
        return int(hensel_sqrt(-7, self.p, self.e, self.branch))

    def at(self, e: int) -> Embedding:
        return Embedding(self.p, e, self.branch)

    def conjugate(self) -> Embedding:
        return Embedding(self.p, self.e, "large" if self.branch == "small" else "small")

    def __call__(self, x) -> int:
        return embed_int(x, self.s, self.p, self.q)

    def poly(self, f: Poly) -> Poly:
        return f.map_coeffs(self)


# ---------------------------------------------------------------------------
# schemes and points


class Scheme:
    """Homogeneous equations in ``nvars`` variables (projective dimension nvars-1)."""

    def __init__(self, equations, name: str = "", codim: int | None = None):
        eqs = [f for f in equations if not f.is_zero()]
        if not eqs:
            raise ValueError("a scheme needs at least one nonzero equation")
        n = eqs[0].nvars
        if any(f.nvars != n for f in eqs):
            raise ValueError("equations use different numbers of variables")
        if not all(f.is_homogeneous() for f in eqs):
            raise ValueError("equations must be homogeneous")
        self.equations = eqs
        self.nvars = n
        self.name = name
        self.codim = codim
        self._reduced: dict = {}
        self._jac: dict = {}

    @property
    def N(self) -> int:
        return self.nvars - 1

    def __len__(self):
        return len(self.equations)

    def __repr__(self):
        return f"Scheme({self.name or '?'}, {len(self)} eqs in P^{self.N})"

    @cached_property
    def digest(self) -> str:
        text = serialize_equations(self.equations)
        return hashlib.sha256(text.encode()).hexdigest()

    def extend(self, extra, name: str = "") -> Scheme:
        extra = [extra] if isinstance(extra, Poly) else list(extra)
        return Scheme(self.equations + extra, name or self.name,
                      None if self.codim is None else self.codim + len(extra))

    def reduced(self, emb: Embedding) -> list[Poly]:
        """Equations with coefficients mapped into Z/p^e (cached)."""
        key = (emb.p, emb.e, emb.branch)
        if key not in self._reduced:
            self._reduced[key] = [emb.poly(f) for f in self.equations]
        return self._reduced[key]

    def jacobian_polys(self, emb: Embedding | None = None) -> list[list[Poly]]:
        key = None if emb is None else (emb.p, emb.e, emb.branch)
        if key not in self._jac:
            eqs = self.equations if emb is None else self.reduced(emb)
            self._jac[key] = [[f.diff(i) for i in range(self.nvars)] for f in eqs]
        return self._jac[key]

    def residuals_mod(self, x, emb: Embedding) -> list[int]:
        return [f.eval_mod(x, emb.q) for f in self.reduced(emb)]

    def contains_mod(self, x, emb: Embedding) -> bool:
        return not any(self.residuals_mod(x, emb))

    def contains(self, x) -> bool:
        """Exact membership for points over Q(sqrt(-7))."""
        return all(not f.eval(list(x)) for f in self.equations)

    def jacobian_mod(self, x, emb: Embedding) -> np.ndarray:
        J = self.jacobian_polys(emb)
        q = emb.q
        return np.array([[g.eval_mod(x, q) for g in row] for row in J], dtype=object)


def normalize(x, p: int, q: int | None = None) -> tuple:
    """Scale so the first unit coordinate is 1 (coordinates mod q)."""
    q = q or p
    x = [int(v) % q for v in x]
    lead = next((v for v in x if v % p), None)
    if lead is None:
        raise ValueError("point has no unit coordinate")
    inv = pow(lead, -1, q)
    return tuple(v * inv % q for v in x)


def normalize_exact(x) -> tuple:
    lead = next((v for v in x if v), None)
    if lead is None:
        raise ValueError("zero vector is not a projective point")
    return tuple(v / lead for v in x)


# ---------------------------------------------------------------------------
# Jacobian ranks


def jacobian_rank(S: Scheme, x, emb: Embedding | None = None, check: bool = True) -> int:
    """Rank of the Jacobian of S at x over the point's residue field.

    ``x`` may be exact (ints, Fractions, QuadElt), PadicElt coordinates (the
    rank is taken after reduction mod p), or plain ints together with
    ``emb`` (read mod p).
    """
    if isinstance(x[0], PadicElt):
        ring = x[0].ring
        res = ring.residue_field()
        xr = [res(v.c) for v in x]
        E = Embedding(ring.p, 1, emb.branch if emb else "small")
        J = S.jacobian_polys(None)
        conv = lambda c: res(E(c))  # noqa: E731
        eqs = [f.map_coeffs(conv) for f in S.equations]
        if check and any(f.eval(xr) for f in eqs):
            raise NotOnScheme("point does not satisfy the equations mod p")
        rows = [[g.map_coeffs(conv).eval(xr) for g in row] for row in J]
        if res.k == 1:
            return linalg.rank_mod(np.array([[int(v) for v in r] for r in rows],
                                            dtype=np.int64), ring.p)
        return linalg.rank(rows)
    if emb is not None:
        E = emb.at(1)
        xi = [int(v) % E.p for v in x]
        if check and not S.contains_mod(xi, E):
            raise NotOnScheme("point does not satisfy the equations mod p")
        return linalg.rank_mod(S.jacobian_mod(xi, E).astype(np.int64), E.p)
    xq = [QuadElt.coerce(v) if not isinstance(v, QuadElt) else v for v in x]
    if check and not S.contains(xq):
        raise NotOnScheme("point does not satisfy the equations")
    J = S.jacobian_polys(None)
    return linalg.rank([[g.eval(xq) for g in row] for row in J])


def is_nonreduced_cut(S: Scheme, L: Poly, sample, emb: Embedding) -> bool:
    """Tangent-dimension jump test for the cut L at every sample point.

    True iff the Jacobian of S + {L} has rank <= N - 2 at every sample point
    (read mod p), i.e. the Zariski tangent space of the cut is at least
    2-dimensional along the whole sample.
    """
    sample = list(sample)
    if not sample:
        raise EmptySample("no sample points on the cut")
    T = S.extend(L)
    E = emb.at(1)
    for x in sample:
        if not T.contains_mod(x, E):
            raise NotOnScheme(f"sample point {x} is not on the cut")
        if linalg.rank_mod(T.jacobian_mod(x, E).astype(np.int64), E.p) > S.N - 2:
            return False
    return True


# ---------------------------------------------------------------------------
# pools


@dataclass
class Pool:
    """F_p-points of a scheme, normalized, with their Jacobian ranks."""

    p: int
    digest: str
    points: list
    ranks: list
    strategy: str = "full"
    seed: int = 0
    branch: str = "small"

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def rank_histogram(self) -> dict:
        hist: dict = {}
        for r in self.ranks:
            hist[r] = hist.get(r, 0) + 1
        return dict(sorted(hist.items()))

    def on(self, L: Poly, emb: Embedding) -> list:
        Lr = emb.at(1).poly(L)
        return [x for x in self.points if Lr.eval_mod(x, self.p) == 0]

    def save(self, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"# digest {self.digest}", f"# p {self.p}",
                 f"# strategy {self.strategy}", f"# seed {self.seed}",
                 f"# branch {self.branch}", f"# count {len(self.points)}"]
        for x, r in zip(self.points, self.ranks):
            lines.append(" ".join(map(str, x)) + f" | {r}")
        path.write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: Path) -> Pool:
        head: dict = {}
        pts, ranks = [], []
        for line in Path(path).read_text().splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition(" ")
                head[k] = v
            elif line.strip():
                coords, _, r = line.partition("|")
                pts.append(tuple(int(t) for t in coords.split()))
                ranks.append(int(r))
        if int(head.get("count", len(pts))) != len(pts):
            raise ValueError(f"truncated pool file {path}")
        return cls(int(head["p"]), head["digest"], pts, ranks, head.get("strategy", "full"),
                   int(head.get("seed", 0)), head.get("branch", "small"))


def _term_tables(polys: list[Poly], p: int, n: int):
    """Flatten polynomials mod p for the scan kernel.

    The last two variables are the scanned tail; every other factor of a
    term is stored as (position, exponent) pairs.
    """
    maxdeg = max(f.degree() for f in polys)
    D = maxdeg + 1
    starts = [0]
    coef, slot, fpos, fexp, nf = [], [], [], [], []
    width = max(1, maxdeg)
    for f in polys:
        for m, c in f.terms.items():
            c %= p
            if not c:
                continue
            coef.append(c)
            slot.append(m[n - 2] * D + m[n - 1])
            fac = [(i, a) for i, a in enumerate(m[: n - 2]) if a]
            nf.append(len(fac))
            fpos.append([i for i, _ in fac] + [0] * (width - len(fac)))
            fexp.append([a for _, a in fac] + [0] * (width - len(fac)))
        starts.append(len(coef))
    return (np.array(starts, np.int64), np.array(coef, np.int64), np.array(slot, np.int64),
            np.array(fpos, np.int64).reshape(-1, width), np.array(fexp, np.int64).reshape(-1, width),
            np.array(nf, np.int64), D)


def _scan_block_py(p, n, lead, lo, hi, starts, coef, slot, fpos, fexp, nf, D, out):
    """Pure-Python reference of the scan kernel (also the numba source)."""
    neq = starts.shape[0] - 1
    npre = n - 3 - lead
    pw = np.ones((p, D), np.int64)
    for v in range(p):
        for a in range(1, D):
            pw[v, a] = pw[v, a - 1] * v % p
    x = np.zeros(n, np.int64)
    slots = np.zeros(D * D, np.int64)
    cand_y = np.zeros(p * p, np.int64)
    cand_z = np.zeros(p * p, np.int64)
    nout = 0
    for idx in range(lo, hi):
        x[:] = 0
        x[lead] = 1
        r = idx
        for k in range(npre):
            x[n - 3 - k] = r % p
            r //= p
        ncand = -1
        for j in range(neq):
            slots[:] = 0
            for t in range(starts[j], starts[j + 1]):
                v = coef[t]
                for f in range(nf[t]):
                    v = v * pw[x[fpos[t, f]], fexp[t, f]] % p
                slots[slot[t]] = (slots[slot[t]] + v) % p
            if ncand < 0:
                ncand = 0
                for y in range(p):
                    for z in range(p):
                        s = 0
                        for a in range(D):
                            for b in range(D - a):
                                c = slots[a * D + b]
                                if c:
                                    s += c * pw[y, a] % p * pw[z, b]
                        if s % p == 0:
                            cand_y[ncand] = y
                            cand_z[ncand] = z
                            ncand += 1
            else:
                keep = 0
                for i in range(ncand):
                    y = cand_y[i]
                    z = cand_z[i]
                    s = 0
                    for a in range(D):
                        for b in range(D - a):
                            c = slots[a * D + b]
                            if c:
                                s += c * pw[y, a] % p * pw[z, b]
                    if s % p == 0:
                        cand_y[keep] = y
                        cand_z[keep] = z
                        keep += 1
                ncand = keep
            if ncand == 0:
                break
        for i in range(ncand):
            if nout < out.shape[0]:
                out[nout, :n - 2] = x[:n - 2]
                out[nout, n - 2] = cand_y[i]
                out[nout, n - 1] = cand_z[i]
            nout += 1
    return nout


try:
    from numba import njit

    _scan_block = njit(cache=True)(_scan_block_py)
except ImportError:  # pragma: no cover
    _scan_block = _scan_block_py


def _cascade_order(polys: list[Poly]) -> list[Poly]:
    """Cheapest equations first so most candidates die early."""
    return sorted(polys, key=len)


def _scan_projective(polys: list[Poly], p: int, n: int, chunk: int = 1 << 16,
                     max_hits: int = 1 << 16):
    """All normalized F_p-points of V(polys) in P^{n-1}."""
    polys = _cascade_order([f.reduce_mod(p) for f in polys])
    polys = [f for f in polys if not f.is_zero()]
    hits = []
    if not polys:
        for lead in range(n):
            for tail in itertools.product(range(p), repeat=n - 1 - lead):
                hits.append((0,) * lead + (1,) + tail)
        return hits
    if n >= 3:
        tables = _term_tables(polys, p, n)
        out = np.zeros((max_hits, n), np.int64)
        for lead in range(n - 2):
            total = p ** (n - 3 - lead)
            for lo in range(0, total, chunk):
                hi = min(total, lo + chunk)
                cnt = _scan_block(p, n, lead, lo, hi, *tables, out)
                if cnt > max_hits:
                    raise BudgetExceeded(f"more than {max_hits} hits in one chunk")
                hits.extend(tuple(int(v) for v in row) for row in out[:cnt])
    for lead in range(max(0, n - 2), n):
        for tail in itertools.product(range(p), repeat=n - 1 - lead):
            x = (0,) * lead + (1,) + tail
            if all(f.eval_mod(x, p) == 0 for f in polys):
                hits.append(x)
    return hits


def projective_count(N: int, p: int) -> int:
    return (p ** (N + 1) - 1) // (p - 1)


def _random_subspace(p: int, n: int, dim: int, rng: random.Random) -> np.ndarray:
    while True:
        B = np.array([[rng.randrange(p) for _ in range(n)] for _ in range(dim + 1)],
                     dtype=np.int64)
        if linalg.rank_mod(B, p) == dim + 1:
            return B


def enumerate_pool(S: Scheme, emb: Embedding, strategy: str = "full", dim: int = 7,
                   count: int = 1, seed: int = 0, budget: int = DEFAULT_BUDGET,
                   cache_dir: Path | None = None, workers: int = 1) -> Pool:
    """F_p-points of S by full scan or by scanning random linear slices.

    Every returned point is re-verified against all equations.  With
    ``cache_dir`` the pool is stored as plain text keyed by the scheme
    digest, prime, strategy and seed.
    """
    p = emb.p
    E = emb.at(1)
    tag = "full" if strategy == "full" else f"slice{dim}x{count}"
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"pool-{S.digest[:16]}-p{p}-{E.branch}-{tag}-s{seed}.txt"
        if path.exists():
            pool = Pool.load(path)
            if pool.digest == S.digest and pool.p == p:
                log.info("pool loaded from %s", path)
                return pool
    polys = S.reduced(E)
    n = S.nvars
    if strategy == "full":
        cost = projective_count(S.N, p)
        if cost > budget:
            raise BudgetExceeded(f"full scan of P^{S.N} over F_{p} needs {cost:.3g} > {budget:.3g}")
        pts = _scan_projective(polys, p, n)
    elif strategy == "slice":
        cost = count * projective_count(dim, p)
        if cost > budget:
            raise BudgetExceeded(f"slice scan needs {cost:.3g} > {budget:.3g}")
        rng = random.Random(seed)
        found = set()
        for _ in range(count):
            B = _random_subspace(p, n, dim, rng)
            images = [Poly(dim + 1, {tuple(int(k == r) for k in range(dim + 1)): int(B[r, i])
                                     for r in range(dim + 1)}) for i in range(n)]
            sub = [f.substitute(images).reduce_mod(p) for f in polys]
            for t in _scan_projective(sub, p, dim + 1):
                x = np.array(t, np.int64).dot(B) % p
                found.add(normalize(x.tolist(), p))
        pts = sorted(found)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    pts = sorted(set(pts))
    for x in pts:
        if not S.contains_mod(x, E):
            raise AssertionError(f"scan returned a non-point {x}")
    ranks = [linalg.rank_mod(S.jacobian_mod(x, E).astype(np.int64), p) for x in pts]
    pool = Pool(p, S.digest, pts, ranks, tag, seed, E.branch)
    if path is not None:
        pool.save(path)
    return pool


# ---------------------------------------------------------------------------
# formal neighborhoods


@dataclass
class FormalNeighborhood:
    """Coordinates as polynomials in (t1, t2), truncated past ``order``."""

    point: tuple
    order: int
    coords: list
    chart: int
    graph: tuple
    residual_order: int = field(default=0)

    def pullback(self, f: Poly, order: int | None = None) -> Poly:
        return f.substitute(self.coords, maxdeg=self.order if order is None else order)

    def truncate(self, order: int) -> FormalNeighborhood:
        return FormalNeighborhood(self.point, order, [c.truncate(order) for c in self.coords],
                                  self.chart, self.graph)


def formal_neighborhood(S: Scheme, x, order: int, graph: tuple | None = None) -> FormalNeighborhood:
    """Two-parameter parametrization of S at a smooth exact point.

    Works in the chart where the first nonzero coordinate is 1 and takes
    two coordinates (the first pair onto which the tangent plane projects
    isomorphically, unless ``graph`` is given) as the parameters; the other
    coordinates are solved order by order.
    """
    x = normalize_exact([QuadElt.coerce(v) for v in x])
    n = S.nvars
    if not S.contains(x):
        raise NotOnScheme("base point is not on the scheme")
    J = [[g.eval(list(x)) for g in row] for row in S.jacobian_polys(None)]
    if linalg.rank(J) != S.N - 2:
        raise SingularPoint(f"Jacobian rank at {x} is not {S.N - 2}")
    chart = next(i for i, v in enumerate(x) if v)
    free = [i for i in range(n) if i != chart]
    if graph is None:
        for j, k in itertools.combinations(free, 2):
            others = [i for i in free if i not in (j, k)]
            if linalg.rank([[row[i] for i in others] for row in J]) == len(others):
                graph = (j, k)
                break
        else:
            raise SingularPoint("tangent plane does not project onto any coordinate pair")
    j, k = graph
    others = [i for i in free if i not in (j, k)]
    Jo = [[row[i] for i in others] for row in J]
    R, rk, piv = linalg.rref([r + [0] for r in Jo])
    if rk != len(others):
        raise SingularPoint("graph coordinates do not parametrize the tangent plane")
    zero = QuadElt(0)
    coords = [Poly.const(x[i], 2) for i in range(n)]
    coords[j] = coords[j] + Poly.var(0, 2, QuadElt(1))
    coords[k] = coords[k] + Poly.var(1, 2, QuadElt(1))
    for r in range(1, order + 1):
        res = [f.substitute(coords, maxdeg=r).homogeneous_part(r) for f in S.equations]
        monos = sorted({m for g in res for m in g.terms}, reverse=True)
        for m in monos:
            rhs = [-g.coeff(m) for g in res]
            sol = _solve_exact(Jo, rhs, len(others))
            if sol is None:
                raise InconsistentLift(f"no degree-{r} correction at {x}")
            for i, c in zip(others, sol):
                if c != zero:
                    coords[i] = coords[i] + Poly.monomial(m, c)
    return FormalNeighborhood(tuple(x), order, coords, chart, graph)


def _solve_exact(A, b, ncols: int):
    rows = [list(r) + [v] for r, v in zip(A, b)]
    R, rk, piv = linalg.rref(rows)
    if ncols in piv:
        return None
    sol = [QuadElt(0)] * ncols
    for i, c in enumerate(piv):
        sol[c] = R[i][ncols]
    return sol


def vanishing_conditions(fn: FormalNeighborhood, ansatz: list[Poly], order: int) -> list[list]:
    """Rows of the linear conditions for sum b_i f_i to vanish on fn up to ``order``."""
    pulled = [fn.pullback(f, order) for f in ansatz]
    monos = sorted({m for g in pulled for m in g.terms if sum(m) <= order}, reverse=True)
    return [[g.coeff(m) for g in pulled] for m in monos]


__all__ = [
    "Embedding", "Scheme", "Pool", "FormalNeighborhood", "normalize", "normalize_exact",
    "jacobian_rank", "is_nonreduced_cut", "enumerate_pool", "projective_count",
    "formal_neighborhood", "vanishing_conditions", "DEFAULT_BUDGET",
]
