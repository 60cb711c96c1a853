"""Time the F_p-point scan of the toy surface for the full and slice strategies."""

from __future__ import annotations

import argparse
import time

from fppkit.scheme import Embedding, enumerate_pool
from fppkit.toy import ToySurface


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--prime", type=int, default=11)
    ap.add_argument("--slice-dim", type=int, default=7)
    ap.add_argument("--slice-count", type=int, default=2)
    ap.add_argument("--skip-full", action="store_true")
    args = ap.parse_args()
    S = ToySurface().scheme()
    emb = Embedding(args.prime, 2, "small")
    runs = [("slice", dict(strategy="slice", dim=args.slice_dim, count=args.slice_count))]
    if not args.skip_full:
        runs.insert(0, ("full", dict(strategy="full")))
    for name, kw in runs:
        t0 = time.perf_counter()
        pool = enumerate_pool(S, emb, **kw)
        print(f"{name:6s} {len(pool):5d} points  {time.perf_counter() - t0:8.2f} s")


if __name__ == "__main__":
    main()
