"""Acceptance criteria 1-9.  Each test prints one PASS/FAIL line in the summary.

Criteria that need the 84-cubic surface fail with a BLOCKED reason when
data/cubics84.txt is absent; they run in full once the file is present.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction
from pathlib import Path

import pytest

from fppkit.arith import QuadElt, embed_quad, hensel_sqrt
from fppkit.errors import DatasetMissing
from fppkit.pipelines import stages, torsion
from fppkit.pipelines.config import RunConfig
from fppkit.pipelines.context import Context
from fppkit.poly import format_coeff
from fppkit.reconstruct import recognize_quad

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"


class Surface:
    """Surface-backed context with memoized stage reports."""

    def __init__(self, ctx: Context):
        self.ctx = ctx
        self.reports: dict = {}

    def stage(self, name: str, **kw):
        key = (name,) + tuple(sorted(kw.items()))
        if key not in self.reports:
            self.reports[key] = stages.STAGES[name](self.ctx, **kw)
        return self.reports[key]


@pytest.fixture(scope="session")
def surface(tmp_path_factory):
    cfg = RunConfig(data_dir=str(DATA), cache_dir=str(ROOT / ".fppkit-cache"),
                    report=str(tmp_path_factory.mktemp("acc") / "reports.jsonl"))
    ctx = Context(cfg)
    try:
        ctx.scheme
    except DatasetMissing as exc:
        pytest.fail(f"BLOCKED: {exc}")
    t0 = time.perf_counter()
    ctx.pool
    s = Surface(ctx)
    s.pool_seconds = time.perf_counter() - t0
    return s


def _failed(rep) -> list:
    return [k for k, v in rep.checks.items() if not v["ok"]]


def test_criterion_1(surface):
    rep = surface.stage("search-cuts")
    assert set(map(tuple, rep.findings["triples"])) == {(0, 0, 0), (7, 0, 0), (8, 7, 7)}
    assert rep.status == "ok", _failed(rep)
    assert rep.findings["candidate_seconds"] <= 60
    assert surface.pool_seconds <= 3600


def test_criterion_2(surface):
    rep = surface.stage("lift-cuts")
    w = QuadElt(0, 1)
    want = {"D1": [(1 + w) / 2] * 3,
            "D8": [-5 + w] * 3 + [4 - 4 * w] * 3 + [QuadElt(-4)] * 3}
    cuts = surface.ctx.fixtures.cuts
    for label, coeffs in want.items():
        assert label in rep.findings, f"{label} was not lifted"
        got = cuts[label]
        units = [tuple(int(k == i) for k in range(10)) for i in range(1, 10)]
        assert [got.coeff(m) for m in units][:len(coeffs)] == coeffs
        assert rep.checks[f"{label}_matches_fixture"]["ok"]
    assert rep.findings["D1"]["coefficients"] == [format_coeff((1 + w) / 2), "0", "0"]
    assert rep.status == "ok", _failed(rep)
    assert rep.seconds <= 300


def test_criterion_3():
    p, e = 11, 21
    s = hensel_sqrt(-7, p, e)
    rng = random.Random(2024)
    t0 = time.perf_counter()
    done = 0
    while done < 500:
        c = rng.randint(1, 10**4)
        if c % p == 0:
            continue
        x = QuadElt(Fraction(rng.randint(-10**4, 10**4), c), Fraction(rng.randint(-10**4, 10**4), c))
        a = int(embed_quad(x, s))
        assert recognize_quad(a, int(s), p**e) == x
        done += 1
    assert time.perf_counter() - t0 <= 60


def test_criterion_4(surface):
    rep = surface.stage("group-relations")
    coords = rep.findings["coordinates"]
    for target, ok in torsion.verify_expected(coords).items():
        assert ok, f"relation for {target} missing"
    assert rep.status == "ok", _failed(rep)
    assert rep.seconds <= 1800


def test_criterion_5(surface):
    for label in torsion.LABELS:
        rep = surface.stage("curve-quadrics", label=label)
        assert rep.findings["quadrics_dim"] == 28 and rep.status == "ok", (label, _failed(rep))
    rep = surface.stage("four-h")
    assert rep.findings["r3_quadrics_dim"] == 21 and rep.status == "ok", _failed(rep)
    for label in ("D1", "D8"):
        rep = surface.stage("four-h-torsion", label=label)
        assert rep.findings["sections_dim"] == 3
        assert all(rep.findings[f"s{k}_quadrics_dim"] == 21 for k in range(3))
        assert rep.status == "ok", (label, _failed(rep))
    rep = surface.stage("five-h-d")
    assert rep.findings["sections_dim"] == 6 and rep.findings["sextics_dim"] == 56
    assert rep.status == "ok", _failed(rep)
    rep = surface.stage("five-h")
    assert rep.checks["sections_dim"]["ok"]
    assert rep.findings["sextics_dim"] == 59
    assert all(rep.findings[f"Z{i}_quadrics_dim"] == 15 for i in range(1, 7))
    assert rep.status == "ok", _failed(rep)
    assert rep.seconds <= 4 * 3600


def test_criterion_6():
    cfg = RunConfig(data_dir=str(DATA), cache_dir=str(ROOT / ".fppkit-cache"),
                    fixture_points=100)
    rep = stages.cmd_verify_fixtures(Context(cfg))
    for name in ("s3_weights", "d_weight_zero", "d_g3_invariant", "cuts_reduce_to_triples"):
        assert rep.checks[name]["ok"], name
    if "surface_checks" in rep.checks:
        pytest.fail(rep.checks["surface_checks"]["detail"])
    assert rep.findings["sextic_identity_points"] >= 100
    assert rep.findings["s3_free_coefficients"] == {"before": 8, "after": 6}
    assert rep.status == "ok", _failed(rep)
    assert rep.seconds <= 600


def test_criterion_7(surface):
    rep = surface.stage("five-h")
    assert len(rep.findings["singular_coordinate_points"]) == 3
    assert rep.checks["sextics_smooth_sample"]["ok"]
    rep = surface.stage("four-h")
    for i in (1, 2, 3):
        assert rep.checks[f"p{i}_on_surface"]["ok"] and rep.checks[f"p{i}_on_r3_system"]["ok"]
    assert rep.checks["no_U7_U8_U9_squares"]["ok"]


def test_criterion_8(surface):
    for label in ("D1", "D8"):
        rep = surface.stage("four-h-torsion", label=label)
        assert rep.findings["determinant_valuation"] == 0, label
        assert rep.seconds <= 300


def test_criterion_9(toy, toy_scheme, toy_fixtures, toy_pool, tmp_path):
    import test_lift
    import test_linalg
    import test_reconstruct

    t0 = time.perf_counter()
    test_reconstruct.test_lll_on_seeded_bases()
    test_lift.test_hensel_telescoping()
    test_linalg.test_rank_nullity_exhaustive_f2()
    cfg = RunConfig(cache_dir=str(tmp_path), precision=18)
    ctx = Context(cfg, scheme=toy_scheme, fixtures=toy_fixtures)
    ctx._pool = toy_pool
    mats = test_linalg.build_pipeline_matrices(ctx, toy)
    for M in mats.values():
        test_linalg.check_monotone(M)
    assert time.perf_counter() - t0 <= 600
