"""A synthetic test surface: the conic Veronese of P^2 placed linearly in P^9.

Coordinates are ten quadrics in (x, y, z).  U1..U9 are fixed and U0 is
chosen so that the designed cut U0 + a1 (U1+U2+U3) + a2 (U4+U5+U6) +
a3 (U7+U8+U9) pulls back to ell^2: a hyperplane section that is a double
line, exactly the shape of a nonreduced cut.  Everything about the surface
is known in closed form, which gives independent oracles for the search,
lifting and nullspace machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .arith import QuadElt
from .poly import Poly, monomial_basis, orbit_sums
from .scheme import Embedding, Scheme

W = QuadElt(0, 1)

# U1..U9 as quadrics in x, y, z; the last block is deliberately not cyclic so
# the three orbit sums stay linearly independent
_BASE_QUADRICS = [
    {(2, 0, 0): 1}, {(0, 2, 0): 1}, {(0, 0, 2): 1},
    {(1, 1, 0): 1}, {(0, 1, 1): 1}, {(1, 0, 1): 1},
    {(2, 0, 0): 1, (0, 1, 1): 1},
    {(0, 2, 0): 2},
    {(0, 0, 2): 3, (1, 1, 0): 1},
]


@dataclass(frozen=True)
class ToySurface:
    ell: tuple = (1, 1, W)
    design: tuple = (QuadElt(Fraction(1, 2), Fraction(1, 2)), QuadElt(0), QuadElt(0))
    base: list = field(default_factory=lambda: [Poly(3, q) for q in _BASE_QUADRICS])

    @property
    def ell_poly(self) -> Poly:
        return Poly.linear(list(self.ell))

    def coordinate_quadrics(self) -> list[Poly]:
        """The ten quadrics in (x, y, z) giving U0..U9."""
        S = [self.base[0] + self.base[1] + self.base[2],
             self.base[3] + self.base[4] + self.base[5],
             self.base[6] + self.base[7] + self.base[8]]
        u0 = self.ell_poly * self.ell_poly
        for a, s in zip(self.design, S):
            u0 = u0 - s * a
        return [u0.map_coeffs(QuadElt.coerce)] + [b.map_coeffs(QuadElt.coerce) for b in self.base]

    def param(self, pt) -> list:
        return [f.eval(list(pt)) for f in self.coordinate_quadrics()]

    def param_mod(self, pt, emb: Embedding) -> tuple:
        return tuple(emb.poly(f).eval_mod(list(pt), emb.q) for f in self.coordinate_quadrics())

    def designed_cut(self) -> Poly:
        L = orbit_sums()
        cut = L[0]
        for a, s in zip(self.design, L[1:]):
            cut = cut + s * a
        return cut.map_coeffs(QuadElt.coerce)

    def equations(self) -> list[Poly]:
        """Linear relations plus a basis of the quadrics vanishing on the image."""
        Q = self.coordinate_quadrics()
        mon2 = monomial_basis(2, 3)
        lin_rows = [[q.coeff(m) for q in Q] for m in mon2]
        lin = linalg.nullspace(lin_rows, 10)
        eqs = [Poly.linear(v) for v in lin]
        U = monomial_basis(2, 10)
        images = []
        for m in U:
            f = Poly.const(QuadElt(1), 3)
            for i, a in enumerate(m):
                for _ in range(a):
                    f = f * Q[i]
            images.append(f)
        mon4 = monomial_basis(4, 3)
        rows = [[g.coeff(m) for g in images] for m in mon4]
        quad = linalg.nullspace(rows, len(U))
        # drop quadrics already in the ideal of the linear relations
        lin_ideal = []
        for L in eqs:
            for i in range(10):
                lin_ideal.append(L * Poly.var(i, 10, QuadElt(1)))
        stack = [[g.coeff(m) for m in U] for g in lin_ideal]
        R, rk, _ = linalg.rref(stack)
        for v in quad:
            trial = R[:rk] + [list(v)]
            R2, rk2, _ = linalg.rref(trial)
            if rk2 > rk:
                eqs.append(Poly(10, dict(zip(U, v))))
                R, rk = R2, rk2
        return eqs

    def scheme(self) -> Scheme:
        return Scheme(self.equations(), "toy-veronese", codim=7)

    def points_mod(self, emb: Embedding) -> list[tuple]:
        """Images of all points of P^2(F_p), normalized."""
        from .scheme import normalize
        p = emb.p
        E = emb.at(1)
        out = set()
        for pt in _proj_points(3, p):
            out.add(normalize(self.param_mod(pt, E), p))
        return sorted(out)

    def line_points_mod(self, emb: Embedding) -> list[tuple]:
        """F_p-points of the double line of the designed cut."""
        from .scheme import normalize
        p = emb.p
        E = emb.at(1)
        ell = E.poly(self.ell_poly)
        return sorted({normalize(self.param_mod(pt, E), p)
                       for pt in _proj_points(3, p) if ell.eval_mod(list(pt), p) == 0})

    def cut_conic(self, b, emb: Embedding) -> np.ndarray:
        """Symmetric Gram matrix mod p of the pullback of U0 + b . orbit sums."""
        p = emb.p
        E = emb.at(1)
        Q = [E.poly(f) for f in self.coordinate_quadrics()]
        L = orbit_sums()
        pull = Q[0]
        for bj, s in zip(b, L[1:]):
            for i in range(10):
                if s.coeff(tuple(int(k == i) for k in range(10))):
                    pull = pull + Q[i] * (bj % p)
        inv2 = pow(2, -1, p)
        G = np.zeros((3, 3), dtype=np.int64)
        for m, c in pull.terms.items():
            idx = [i for i in range(3) for _ in range(m[i])]
            i, j = idx
            if i == j:
                G[i, i] = (G[i, i] + c) % p
            else:
                G[i, j] = (G[i, j] + c * inv2) % p
                G[j, i] = G[i, j]
        return G


def _proj_points(n: int, p: int):
    import itertools
    for lead in range(n):
        for tail in itertools.product(range(p), repeat=n - 1 - lead):
            yield (0,) * lead + (1,) + tail


def nonreduced_triples_oracle(toy: ToySurface, emb: Embedding) -> list[tuple]:
    """Triples whose cut pulls back to a double line (Gram rank exactly 1)."""
    import itertools
    p = emb.p
    return [b for b in itertools.product(range(p), repeat=3)
            if linalg.rank_mod(toy.cut_conic(b, emb), p) == 1]
