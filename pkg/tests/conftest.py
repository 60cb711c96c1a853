from __future__ import annotations

import pytest

from fppkit.pipelines.config import RunConfig
from fppkit.pipelines.context import Context
from fppkit.pipelines.data import Fixtures
from fppkit.poly import orbit_sums
from fppkit.scheme import Embedding, enumerate_pool
from fppkit.toy import ToySurface

TOY_TRIPLES = [(0, 1, 10), (7, 0, 0)]


@pytest.fixture(scope="session")
def toy():
    return ToySurface()


@pytest.fixture(scope="session")
def toy_scheme(toy):
    return toy.scheme()


@pytest.fixture(scope="session")
def emb():
    return Embedding(11, 21, "small")


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("cache")


@pytest.fixture(scope="session")
def toy_pool(toy_scheme, emb, cache_dir):
    return enumerate_pool(toy_scheme, emb, "full", cache_dir=cache_dir)


@pytest.fixture(scope="session")
def toy_fixtures(toy):
    cut = toy.designed_cut()
    return Fixtures({"cut_ansatz": orbit_sums(), "search_triples": [(7, 0, 0)],
                     "cut_labels": ["A"], "cuts": [cut]})


@pytest.fixture
def toy_ctx(toy_scheme, toy_fixtures, toy_pool, tmp_path):
    cfg = RunConfig(cache_dir=str(tmp_path / "cache"), report=str(tmp_path / "report.jsonl"))
    ctx = Context(cfg, scheme=toy_scheme, fixtures=toy_fixtures)
    ctx._pool = toy_pool
    return ctx


# one summary line per acceptance criterion

_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        num = int(report.nodeid.rsplit("_", 1)[-1].split("[")[0])
        reason = ""
        if report.outcome != "passed":
            text = str(report.longrepr)
            blocked = [ln for ln in text.splitlines() if "BLOCKED" in ln and ln.startswith("E")]
            reason = (blocked[0] if blocked else text.strip().splitlines()[-1]).strip()
            reason = reason.removeprefix("E").strip().removeprefix("Failed:").strip()
        _CRITERIA[num] = ("PASS" if report.outcome == "passed" else "FAIL", reason)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        status, reason = _CRITERIA[num]
        line = f"criterion {num}: {status}"
        terminalreporter.write_line(line + (f"  ({reason[:150]})" if reason else ""))
