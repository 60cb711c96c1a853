"""Shared stage state: configuration, surface, pool, curve samplers, kernels."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .. import linalg
from ..arith import PadicRing, QuadElt, seventh_root_of_unity
from ..errors import (DatasetMissing, Inconsistent, NotOnScheme, PrecisionExhausted,
                      RecognitionFailed, SeedShortage, SingularSeed)
from ..lift import (Linearization, LiftProblem, cut_curve_problem, digits_chooser, hensel,
                    linearize, point_problem, random_chooser, tangent_frame)
from ..poly import Poly, g7_weight, monomial_basis, monomial_matrix, orbit_sums
from ..poly import parse_equations, serialize_equations
from ..reconstruct import rationalize_vector
from ..scheme import Embedding, Pool, Scheme, enumerate_pool, normalize
from .config import RunConfig
from .data import Fixtures, load_fixtures, load_surface
from .report import Report

log = logging.getLogger(__name__)


class Context:
    """Lazily loaded inputs shared by the stages of one run.

    ``scheme`` and ``fixtures`` may be injected (tests use the toy surface);
    otherwise they are read from the data directory on first use.
    """

    def __init__(self, cfg: RunConfig, scheme: Scheme | None = None,
                 fixtures: Fixtures | None = None):
        self.cfg = cfg.validate()
        self.emb = Embedding(cfg.prime, cfg.precision, cfg.branch)
        self._scheme = scheme
        self._fixtures = fixtures
        self._pool: Pool | None = None

    @property
    def scheme(self) -> Scheme:
        if self._scheme is None:
            self._scheme = load_surface(self.cfg.data_dir)
        return self._scheme

    @property
    def fixtures(self) -> Fixtures:
        if self._fixtures is None:
            self._fixtures = load_fixtures(self.cfg.data_dir)
        return self._fixtures

    @property
    def is_surface(self) -> bool:
        return self.scheme.name == "surface"

    @property
    def pool(self) -> Pool:
        if self._pool is None:
            c = self.cfg
            self._pool = enumerate_pool(
                self.scheme, self.emb, c.pool_strategy, c.slice_dim, c.slice_count, c.seed,
                c.budget, Path(c.cache_dir) if c.cache_dir else None, c.workers)
        return self._pool

    def smooth_points(self) -> list:
        codim = self.scheme.codim
        return [x for x, r in zip(self.pool.points, self.pool.ranks)
                if codim is None or r == codim]

    def report(self, stage: str) -> Report:
        inputs = {"scheme": self.scheme.name, "scheme_digest": self.scheme.digest}
        return Report(stage, self.cfg.to_dict(), inputs)

    # -- ring hosting the 7th roots of unity

    @cached_property
    def zeta(self):
        """Primitive 7th root of unity in Z/p^e or in the unramified cubic extension."""
        p, e = self.cfg.prime, self.cfg.precision
        k = 1 if (p - 1) % 7 == 0 else 3
        ring = PadicRing.extension(p, k, e) if k > 1 else PadicRing(p, e)
        return seventh_root_of_unity(ring, self.emb.s)

    def zeta_powers(self) -> list:
        z = self.zeta
        out = [z.ring.one]
        for _ in range(6):
            out.append(out[-1] * z)
        return out

    # -- cached equation files keyed by scheme digest

    def cache_path(self, name: str) -> Path | None:
        if not self.cfg.cache_dir:
            return None
        tag = f"{self.scheme.digest[:16]}-p{self.cfg.prime}-{self.cfg.branch}"
        return Path(self.cfg.cache_dir) / f"{name}-{tag}.txt"

    def save_equations(self, name: str, polys, header: str = "") -> Path | None:
        path = self.cache_path(name)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(serialize_equations(polys, header=header or None))
        return path

    def load_equations(self, name: str, nvars: int = 10):
        path = self.cache_path(name)
        if path is None or not path.exists():
            return None
        return parse_equations(path.read_text(), nvars=nvars)

    def cuts(self) -> tuple[dict, str]:
        """Exact cuts by class label and where they came from."""
        labels = self.fixtures.blocks["cut_labels"]
        cached = self.load_equations("cuts")
        if cached is not None and len(cached) == len(labels):
            return dict(zip(labels, cached)), "lift-cuts cache"
        return self.fixtures.cuts, "fixtures"

    # -- kernels

    def kernel(self, M, strict: bool = True) -> linalg.PadicNullspace:
        c = self.cfg
        return linalg.padic_nullspace(M, c.prime, c.precision, c.margin, strict=strict)

    def rationalize(self, basis, columns) -> list[Poly] | None:
        """Exact polynomials from a kernel basis, or None if recognition fails."""
        if not basis:
            return []
        try:
            R, _ = linalg.echelon_mod(basis, self.cfg.prime, self.cfg.precision)
            out = []
            for row in R:
                vals = rationalize_vector(row, self.emb.s, self.emb.q)
                out.append(Poly(len(columns[0]), {m: v for m, v in zip(columns, vals) if v}))
            return out
        except (RecognitionFailed, PrecisionExhausted) as exc:
            log.info("rationalization failed: %s", exc)
            return None


# ---------------------------------------------------------------------------
# sampling points on curves and surfaces


@dataclass
class Seed:
    problem: LiftProblem
    x0: list
    lin: Linearization
    block: str
    residue: tuple
    used: int = 0


@dataclass
class Sampler:
    """Points mod p^e spread round-robin over seeds in distinct residue discs.

    Every call continues the per-seed index, so later calls return points
    never handed out before (used as holdout sets).
    """

    name: str
    seeds: list
    p: int
    e: int
    generic: bool = False
    rng_seed: int = 0
    skipped: list = field(default_factory=list)

    def __len__(self):
        return len(self.seeds)

    def _chooser(self, seed: Seed, idx: int):
        if self.generic:
            return random_chooser(hash((self.rng_seed, seed.residue, idx)) & 0xFFFFFFFF, self.p)
        return digits_chooser(idx, self.p)

    def sample(self, count: int) -> list[tuple]:
        if not self.seeds:
            raise SeedShortage(f"{self.name}: no usable seed points")
        q = self.p**self.e
        out = []
        while len(out) < count:
            for s in self.seeds:
                if len(out) == count:
                    break
                xs = hensel(s.problem, s.x0, self.e, self._chooser(s, s.used), s.lin)
                s.used += 1
                out.append(normalize(s.problem.unpack(xs, q)[s.block], self.p, q))
        return out


def _try_seed(make, x, skipped) -> Seed | None:
    try:
        return make(x)
    except (SingularSeed, Inconsistent, NotOnScheme, ValueError) as exc:
        skipped.append((x, str(exc)))
        return None


def cut_curve_sampler(ctx: Context, L: Poly, seeds, name: str = "") -> Sampler:
    """Points on the (possibly double) curve cut by L, via tangent-augmented lifting."""
    S, emb = ctx.scheme, ctx.emb

    def make(x):
        chart, pair, vecs = tangent_frame(S, x, emb)
        prob = cut_curve_problem(S, L, emb, (chart, pair))
        x0 = prob.pack({"x0": normalize(x, emb.p), "v0_0": vecs[0], "v0_1": vecs[1]})
        lin = linearize(prob, x0)
        if lin.kernel.shape[0] != 1:
            raise SingularSeed(f"curve tangent has dimension {lin.kernel.shape[0]}")
        return Seed(prob, x0, lin, "x0", normalize(x, emb.p))

    skipped: list = []
    good = [s for s in (_try_seed(make, x, skipped) for x in seeds) if s is not None]
    return Sampler(name or "cut curve", good, emb.p, emb.e, skipped=skipped)


def scheme_sampler(ctx: Context, T: Scheme, seeds, dim: int, name: str = "",
                   generic: bool = False) -> Sampler:
    """Points on a reduced scheme T of dimension ``dim`` from smooth F_p-seeds."""
    emb = ctx.emb

    def make(x):
        x = normalize(x, emb.p)
        chart = next(i for i, v in enumerate(x) if v)
        prob = point_problem(T, emb, chart)
        x0 = prob.pack({"x": x})
        lin = linearize(prob, x0)
        if lin.kernel.shape[0] != dim:
            raise SingularSeed(f"tangent space has dimension {lin.kernel.shape[0]}, expected {dim}")
        return Seed(prob, x0, lin, "x", x)

    skipped: list = []
    good = [s for s in (_try_seed(make, x, skipped) for x in seeds) if s is not None]
    return Sampler(name or T.name, good, emb.p, emb.e, generic=generic,
                   rng_seed=ctx.cfg.seed, skipped=skipped)


def surface_sampler(ctx: Context) -> Sampler:
    return scheme_sampler(ctx, ctx.scheme, ctx.smooth_points(), 2, "surface", generic=True)


def shuffled(points, seed: int) -> list:
    pts = list(points)
    random.Random(seed).shuffle(pts)
    return pts


# ---------------------------------------------------------------------------
# evaluation rows


def rows(points, basis, q: int) -> np.ndarray:
    return monomial_matrix(np.array(points, dtype=object), basis, q)


def poly_values(polys, points, q: int) -> list[tuple]:
    """Evaluate polynomials with integer coefficients at each point mod q."""
    return [tuple(f.eval_mod(list(x), q) for f in polys) for x in points]


def translate_rows(R: np.ndarray, basis, j: int, zpow: list, q: int) -> np.ndarray:
    """Rows at g7^j-translated points as a (k, rows, cols) coefficient stack.

    A monomial m takes the value zeta^(j wt(m)) m(x) at g7^j x.
    """
    k = zpow[0].ring.k
    out = np.zeros((k,) + R.shape, dtype=object)
    for c, m in enumerate(basis):
        z = zpow[(j * g7_weight(m)) % 7].c
        for t in range(k):
            if z[t]:
                out[t, :, c] = R[:, c] * z[t] % q
    return out


def weight_columns(basis, w: int) -> list:
    return [m for m in basis if g7_weight(m) == w]


def quadric_basis() -> list:
    return monomial_basis(2, 10)


def coefficient_vector(f: Poly, basis, emb: Embedding) -> list[int]:
    return [emb(f.coeff(m)) if f.coeff(m) else 0 for m in basis]


def kernel_polys(basis_vectors, columns) -> list[Poly]:
    """Integer-coefficient polynomials from kernel vectors."""
    n = len(columns[0])
    return [Poly(n, {m: int(c) for m, c in zip(columns, v) if int(c)}) for v in basis_vectors]


def cut_forms(ctx: Context) -> list[Poly]:
    """U0 and the orbit sums, read from the fixtures when available."""
    try:
        return ctx.fixtures.equations("cut_ansatz")
    except (DatasetMissing, KeyError):
        return orbit_sums()


def cut_from_triple(ctx: Context, a) -> Poly:
    L0, *Ls = cut_forms(ctx)
    out = L0
    for ai, Li in zip(a, Ls):
        out = out + Li * QuadElt(ai)
    return out

