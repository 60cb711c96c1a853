"""Hensel lifting of polynomial systems over Z/p^e.

Every system is linearized once at its seed: the Jacobian mod p is reduced
once and each precision step solves J delta = -F(x)/p^d mod p.  Free
directions of the step are fixed by a chooser (zeros by default).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (CountTooLarge, CutNotRigid, Inconsistent, NotOnScheme,
                     SingularSeed)
from .linalg import ModPSolver, nullspace_mod, rank_mod
from .poly import Poly
from .scheme import Embedding, Scheme, normalize

Chooser = Callable[[int, int], list]


# ---------------------------------------------------------------------------
# choosers for the free directions of a step


def zero_chooser(step: int, kdim: int) -> list:
    return [0] * kdim


def random_chooser(seed: int, p: int) -> Chooser:
    def choose(step: int, kdim: int) -> list:
        rng = random.Random(f"{seed}:{step}")
        return [rng.randrange(p) for _ in range(kdim)]
    return choose


def digits_chooser(index: int, p: int) -> Chooser:
    """Base-p digits of ``index`` along the first free direction."""
    def choose(step: int, kdim: int) -> list:
        out = [0] * kdim
        if kdim:
            out[0] = (index // p ** (step - 1)) % p
        return out
    return choose


# ---------------------------------------------------------------------------
# problems


@dataclass
class Block:
    """A named vector of ``size`` entries; pinned entries are constants."""

    name: str
    kind: str
    size: int
    pinned: dict = field(default_factory=dict)
    offset: int = 0

    @property
    def free(self) -> list:
        return [i for i in range(self.size) if i not in self.pinned]

    @property
    def nfree(self) -> int:
        return self.size - len(self.pinned)

    def layout(self) -> list:
        """Per entry: (unknown index, None) or (None, pinned constant)."""
        out, k = [], self.offset
        for i in range(self.size):
            if i in self.pinned:
                out.append((None, self.pinned[i]))
            else:
                out.append((k, None))
                k += 1
        return out

    def unknown_indices(self) -> list:
        return list(range(self.offset, self.offset + self.nfree))


@dataclass
class LiftProblem:
    """Equations in the free entries of a list of blocks, coefficients mod p^e."""

    equations: list
    blocks: list
    p: int
    e: int

    @property
    def nvars(self) -> int:
        return sum(b.nfree for b in self.blocks)

    @property
    def q(self) -> int:
        return self.p**self.e

    def block(self, name: str) -> Block:
        return next(b for b in self.blocks if b.name == name)

    def pack(self, values: dict) -> list:
        x = []
        for b in self.blocks:
            v = values[b.name]
            x.extend(int(v[i]) for i in b.free)
        return x

    def unpack(self, x, q: int | None = None) -> dict:
        q = q or self.q
        out = {}
        for b in self.blocks:
            out[b.name] = tuple(int(x[k]) % q if k is not None else c % q
                                for k, c in b.layout())
        return out

    def residuals(self, x, q: int) -> list:
        return [f.eval_mod(x, q) for f in self.equations]

    def jacobian_mod(self, x, p: int) -> np.ndarray:
        return sparse_jacobian(self.equations, x, p, self.nvars)


@dataclass
class LiftState:
    """Block values mod p^precision."""

    precision: int
    values: dict

    def to_dict(self) -> dict:
        return {"precision": self.precision,
                "values": {k: [str(v) for v in vs] for k, vs in self.values.items()}}


def sparse_jacobian(polys, x, p: int, nvars: int) -> np.ndarray:
    J = np.zeros((len(polys), nvars), dtype=np.int64)
    xp = [int(v) % p for v in x]
    for r, f in enumerate(polys):
        for c, sp in f._sparse_terms():
            vals = [pow(xp[i], a, p) for i, a in sp]
            for t, (i, a) in enumerate(sp):
                d = c * a
                for u, (j, b) in enumerate(sp):
                    d = d * (pow(xp[j], b - 1, p) if u == t else vals[u]) % p
                J[r, i] = (J[r, i] + d) % p
    return J


def instantiate(f: Poly, layout, nvars: int, q: int, times_var: int | None = None) -> Poly:
    """Substitute a block layout into f, optionally times one unknown."""
    out: dict = {}
    for m, c in f.terms.items():
        mono = [0] * nvars
        coeff = c
        for i, a in enumerate(m):
            if not a:
                continue
            k, const = layout[i]
            if k is None:
                coeff = coeff * pow(const, a, q)
            else:
                mono[k] += a
        if not coeff % q:
            continue
        if times_var is not None:
            mono[times_var] += 1
        key = tuple(mono)
        out[key] = (out.get(key, 0) + coeff) % q
    return Poly(nvars, out)


# ---------------------------------------------------------------------------
# the engine


@dataclass
class Linearization:
    solver: ModPSolver
    kernel: np.ndarray
    rank: int


def linearize(problem: LiftProblem, x0) -> Linearization:
    p = problem.p
    if any(problem.residuals(x0, p)):
        raise Inconsistent("seed does not satisfy the system mod p")
    J = problem.jacobian_mod(x0, p)
    solver = ModPSolver(J, p)
    return Linearization(solver, solver.kernel, solver.rank)


def hensel(problem: LiftProblem, x0, e: int, chooser: Chooser | None = None,
           lin: Linearization | None = None) -> list:
    """Lift x0 (mod p) to a solution mod p^e, one p-adic digit per step."""
    p = problem.p
    if e > problem.e:
        raise ValueError(f"coefficients are only known mod {p}^{problem.e}")
    chooser = chooser or zero_chooser
    lin = lin or linearize(problem, x0)
    x = [int(v) % p for v in x0]
    K = lin.kernel
    for d in range(1, e):
        pd, q1 = p**d, p ** (d + 1)
        res = problem.residuals(x, q1)
        if any(r % pd for r in res):
            raise Inconsistent(f"residual not divisible by {p}^{d}")
        b = [(-(r // pd)) % p for r in res]
        delta = lin.solver.solve(b)
        if delta is None:
            raise Inconsistent(f"no correction exists at step {d}")
        if K.shape[0]:
            coef = np.array(chooser(d, K.shape[0]), dtype=np.int64) % p
            delta = (delta + coef.dot(K)) % p
        x = [(xi + pd * int(di)) % q1 for xi, di in zip(x, delta)]
    q = p**e
    if any(problem.residuals(x, q)):
        raise Inconsistent("lifted solution fails the full-precision check")
    return x


# ---------------------------------------------------------------------------
# points on schemes


def point_problem(S: Scheme, emb: Embedding, chart: int) -> LiftProblem:
    blk = Block("x", "point", S.nvars, {chart: 1})
    lay = blk.layout()
    n = blk.nfree
    eqs = [instantiate(f, lay, n, emb.q) for f in S.reduced(emb)]
    return LiftProblem(eqs, [blk], emb.p, emb.e)


def _chart(x, p: int) -> int:
    return next(i for i, v in enumerate(x) if v % p)


def lift_point(S: Scheme, x, emb: Embedding, chooser: Chooser | None = None,
               codim: int | None = None) -> tuple:
    """Lift an F_p-point of S to a point mod p^e reducing to it.

    The first nonzero coordinate stays pinned to 1.  With ``codim`` (or
    ``S.codim``) given, a Jacobian rank below it raises SingularSeed.
    """
    p = emb.p
    x = normalize(x, p)
    chart = _chart(x, p)
    prob = point_problem(S, emb, chart)
    blk = prob.blocks[0]
    x0 = prob.pack({"x": x})
    lin = linearize(prob, x0)
    codim = codim if codim is not None else S.codim
    if codim is not None and lin.rank < codim:
        raise SingularSeed(f"Jacobian rank {lin.rank} < {codim} at {x}")
    xs = hensel(prob, x0, emb.e, chooser, lin)
    return prob.unpack(xs)[blk.name]


def curve_point_family(problem: LiftProblem, x0, e: int, count: int,
                       start: int = 0, lin: Linearization | None = None) -> list[dict]:
    """``count`` distinct lifts of one seed along a curve.

    Each lift fixes the free direction at step d by the d-th base-p digit
    of its index, so distinct indices give points that differ mod p^e.
    """
    p = problem.p
    if start + count > p ** (e - 1):
        raise CountTooLarge(f"only {p}^{e - 1} distinct lifts exist at precision {e}")
    lin = lin or linearize(problem, x0)
    if lin.kernel.shape[0] == 0 and count > 1:
        raise SingularSeed("seed is an isolated solution; no curve direction")
    out = []
    for idx in range(start, start + count):
        xs = hensel(problem, x0, e, digits_chooser(idx, p), lin)
        out.append(problem.unpack(xs, p**e))
    return out


def scheme_point_family(S: Scheme, x, emb: Embedding, count: int) -> list[tuple]:
    """Family of lifts of an F_p-point on a curve given by S."""
    x = normalize(x, emb.p)
    prob = point_problem(S, emb, _chart(x, emb.p))
    lin = linearize(prob, prob.pack({"x": x}))
    if lin.kernel.shape[0] != 1:
        raise SingularSeed(f"expected a 1-dimensional tangent line, got {lin.kernel.shape[0]}")
    return [d["x"] for d in curve_point_family(prob, prob.pack({"x": x}), emb.e, count)]


# ---------------------------------------------------------------------------
# tangent frames and cut systems


def tangent_frame(S: Scheme, x, emb: Embedding, dim: int = 2):
    """Pins and tangent vectors mod p at an F_p-point of a smooth surface.

    Returns ``(chart, pair, vectors)`` with v[chart] = 0 and the tangent
    vectors equal to (1,0) and (0,1) on ``pair``, the first coordinate
    pair onto which the tangent plane projects isomorphically.
    """
    p = emb.p
    E = emb.at(1)
    x = normalize(x, p)
    chart = _chart(x, p)
    J = S.jacobian_mod(x, E).astype(np.int64)
    cols = [i for i in range(S.nvars) if i != chart]
    K = nullspace_mod(J[:, cols], p)
    if K.shape[0] != dim:
        raise SingularSeed(f"tangent space has dimension {K.shape[0]}, expected {dim}")
    for pair in itertools.combinations(range(len(cols)), dim):
        M = K[:, list(pair)]
        if rank_mod(M, p) == dim:
            break
    else:  # pragma: no cover
        raise SingularSeed("no coordinate pair parametrizes the tangent plane")
    # change kernel basis so that the pair coordinates become the identity
    Minv = _inv_mod(M, p)
    V = Minv.dot(K) % p
    vectors = []
    for r in range(dim):
        v = [0] * S.nvars
        for ci, c in enumerate(cols):
            v[c] = int(V[r, ci])
        vectors.append(tuple(v))
    return chart, tuple(cols[i] for i in pair), vectors


def _inv_mod(M, p: int) -> np.ndarray:
    n = M.shape[0]
    from .linalg import rref_mod
    R, piv = rref_mod(np.concatenate([M % p, np.eye(n, dtype=np.int64)], axis=1), p)
    return R[:, n:]


def _curve_blocks(nvars: int, npoints: int, chart_pairs, ntangents: int) -> list:
    blocks = []
    for i in range(npoints):
        chart, pair = chart_pairs[i]
        blocks.append(Block(f"x{i}", "point", nvars, {chart: 1}))
        for t in range(ntangents):
            pins = {chart: 0}
            for s, c in enumerate(pair):
                pins[c] = int(s == t)
            blocks.append(Block(f"v{i}_{t}", "tangent", nvars, pins))
    return blocks


def _assign_offsets(blocks) -> None:
    off = 0
    for b in blocks:
        b.offset = off
        off += b.nfree


def _surface_rows(S: Scheme, emb: Embedding, blocks, nv: int, i: int, ntangents: int):
    """f(x_i) and J_f(x_i) v_{i,t} for every equation f of S."""
    q = emb.q
    xb = next(b for b in blocks if b.name == f"x{i}")
    lay = xb.layout()
    rows = []
    for f in S.reduced(emb):
        rows.append(instantiate(f, lay, nv, q))
    parts = {}
    for f_idx, f in enumerate(S.reduced(emb)):
        for j in range(S.nvars):
            g = f.diff(j)
            if not g.is_zero():
                parts[(f_idx, j)] = instantiate(g, lay, nv, q)
    for t in range(ntangents):
        vb = next(b for b in blocks if b.name == f"v{i}_{t}")
        vlay = vb.layout()
        for f_idx in range(len(S)):
            acc = Poly(nv)
            for j in range(S.nvars):
                g = parts.get((f_idx, j))
                if g is None:
                    continue
                k, const = vlay[j]
                if k is None:
                    if const % q:
                        acc = acc + g.map_coeffs(lambda c: c * const % q)
                else:
                    acc = acc + Poly(nv, {_bump(m, k): c for m, c in g.terms.items()})
            rows.append(acc.reduce_mod(q))
    return rows


def _bump(m, k):
    m = list(m)
    m[k] += 1
    return tuple(m)


def _linear_coeffs(L: Poly, nvars: int, emb: Embedding) -> list:
    out = [0] * nvars
    for m, c in L.terms.items():
        if sum(m) != 1:
            raise ValueError("cut must be a linear form")
        out[m.index(1)] = emb(c)
    return out


def cut_curve_problem(S: Scheme, L: Poly, emb: Embedding, chart_pair, ntangents: int = 2) -> LiftProblem:
    """One point and its tangent frame on the curve underlying the cut L.

    The tangent conditions make the system reduced even when L cuts the
    surface in a double curve.
    """
    blocks = _curve_blocks(S.nvars, 1, [chart_pair], ntangents)
    _assign_offsets(blocks)
    nv = sum(b.nfree for b in blocks)
    q = emb.q
    lc = _linear_coeffs(L, S.nvars, emb)
    rows = _surface_rows(S, emb, blocks, nv, 0, ntangents)
    for b in blocks:
        lay = b.layout()
        terms: dict = {}
        const = 0
        for i, c in enumerate(lc):
            k, pin = lay[i]
            if k is None:
                const = (const + c * pin) % q
            else:
                m = [0] * nv
                m[k] = 1
                terms[tuple(m)] = c
        if const:
            terms[(0,) * nv] = const
        rows.append(Poly(nv, terms))
    return LiftProblem(rows, blocks, emb.p, emb.e)


def cut_system(S: Scheme, L0: Poly, Ls: list, emb: Embedding, chart_pairs,
               ntangents: int = 2) -> LiftProblem:
    """Unknown cut L0 + sum a_j L_j and points/tangents on its curve."""
    m = len(Ls)
    cut = Block("a", "cut", m)
    blocks = [cut] + _curve_blocks(S.nvars, len(chart_pairs), chart_pairs, ntangents)
    _assign_offsets(blocks)
    nv = sum(b.nfree for b in blocks)
    q = emb.q
    l0 = _linear_coeffs(L0, S.nvars, emb)
    lj = [_linear_coeffs(Lk, S.nvars, emb) for Lk in Ls]
    rows = []
    for i in range(len(chart_pairs)):
        rows += _surface_rows(S, emb, blocks, nv, i, ntangents)
    for b in blocks[1:]:
        lay = b.layout()
        terms: dict = {}

        def add(mono, c):
            if c % q:
                terms[mono] = (terms.get(mono, 0) + c) % q

        for i in range(S.nvars):
            k, pin = lay[i]
            base = [0] * nv
            if k is not None:
                base[k] = 1
            coeff_pin = 1 if k is not None else pin
            if not coeff_pin:
                continue
            add(tuple(base), l0[i] * coeff_pin)
            for j in range(m):
                mono = list(base)
                mono[cut.offset + j] += 1
                add(tuple(mono), lj[j][i] * coeff_pin)
        rows.append(Poly(nv, terms))
    return LiftProblem(rows, blocks, emb.p, emb.e)


@dataclass
class CutLift:
    coefficients: tuple
    state: LiftState
    points: list
    escalations: int


def _cut_seed_values(S, L0, Ls, a0, points, emb, ntangents):
    p = emb.p
    vals = {"a": tuple(int(a) % p for a in a0)}
    pairs = []
    for i, x in enumerate(points):
        chart, pair, vecs = tangent_frame(S, x, emb, ntangents)
        pairs.append((chart, pair))
        vals[f"x{i}"] = normalize(x, p)
        for t in range(ntangents):
            vals[f"v{i}_{t}"] = vecs[t]
    return vals, pairs


def lift_cut_system(S: Scheme, L0: Poly, Ls: list, a0, points, emb: Embedding,
                    extra_points=(), max_points: int = 8, ntangents: int = 2) -> CutLift:
    """Lift cut coefficients a0 (mod p) to mod p^e together with curve data.

    The cut block must be determined uniquely at every step; if the seed
    kernel moves it, another point from ``extra_points`` is added (up to
    ``max_points``) before giving up with CutNotRigid.
    """
    points = [normalize(x, emb.p) for x in points]
    extra = [normalize(x, emb.p) for x in extra_points if normalize(x, emb.p) not in points]
    escalations = 0
    while True:
        vals, pairs = _cut_seed_values(S, L0, Ls, a0, points, emb, ntangents)
        prob = cut_system(S, L0, Ls, emb, pairs, ntangents)
        x0 = prob.pack(vals)
        lin = linearize(prob, x0)
        cut_idx = prob.block("a").unknown_indices()
        moves = lin.kernel[:, cut_idx] % emb.p if lin.kernel.size else np.zeros((0, 0))
        if not moves.size or not moves.any():
            break
        if len(points) >= max_points or not extra:
            raise CutNotRigid(f"cut block not determined with {len(points)} points")
        points.append(extra.pop(0))
        escalations += 1
    xs = hensel(prob, x0, emb.e, None, lin)
    state = LiftState(emb.e, prob.unpack(xs))
    return CutLift(state.values["a"], state, points, escalations)


def verify_on(S: Scheme, x, emb: Embedding) -> None:
    if not S.contains_mod(x, emb):
        raise NotOnScheme(f"point fails the equations mod {emb.p}^{emb.e}")
