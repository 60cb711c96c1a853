"""Run pool, search, lift and curve quadrics on the toy surface and print the reports."""

from __future__ import annotations

import argparse
import tempfile

from fppkit.pipelines import stages
from fppkit.pipelines.config import RunConfig
from fppkit.pipelines.context import Context
from fppkit.pipelines.data import Fixtures
from fppkit.poly import orbit_sums
from fppkit.toy import ToySurface


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cache-dir", default=None)
    ap.add_argument("--precision", type=int, default=21)
    args = ap.parse_args()
    toy = ToySurface()
    fixtures = Fixtures({"cut_ansatz": orbit_sums(), "search_triples": [(7, 0, 0)],
                         "cut_labels": ["A"], "cuts": [toy.designed_cut()]})
    cache = args.cache_dir or tempfile.mkdtemp(prefix="fppkit-toy-")
    ctx = Context(RunConfig(cache_dir=cache, precision=args.precision),
                  scheme=toy.scheme(), fixtures=fixtures)
    for rep in (stages.cmd_pool(ctx), stages.cmd_search_cuts(ctx),
                stages.cmd_lift_cuts(ctx),
                stages.cmd_curve_quadrics(ctx, label="A", expect=50)):
        print(rep.text())


if __name__ == "__main__":
    main()
