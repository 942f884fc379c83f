"""Run full weight reduction over a small family and print one row per code.

    python scripts/weight_reduction_family.py [--budget 22] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import time

from csskit.csscode import MeasureOptions, measure
from csskit.weightred import WeightReductionConfig, weight_reduce_full
from csskit.zoo import ZooSpec

FAMILY = [ZooSpec("surface", {"d": 3}), ZooSpec("toric", {"L": 2}), ZooSpec("surface", {"d": 4})]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--budget", type=int, default=22)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="write rows here as well")
    args = ap.parse_args()

    rows = []
    print(f"{'code':<12}{'n':>6}{'k':>4}{'loc_in':>8}{'n_out':>8}{'loc_out':>9}{'ledger':>8}{'secs':>7}")
    for spec in FAMILY:
        code = spec.build()
        t0 = time.perf_counter()
        cfg = WeightReductionConfig(budget=args.budget, seed=args.seed, distances=False, soundness=False)
        final, ledger = weight_reduce_full(code, cfg)
        secs = time.perf_counter() - t0
        p = measure(final, MeasureOptions(distance=False))
        status = "pass" if all(r.status != "fail" for r in ledger) else "fail"
        row = {"code": spec.label, "n": code.n, "k": code.k, "locality_in": measure(code, MeasureOptions(distance=False)).locality,
               "n_out": p.n, "k_out": p.k, "locality_out": p.locality, "ledger": status, "seconds": round(secs, 2)}
        rows.append(row)
        print(f"{row['code']:<12}{row['n']:>6}{row['k']:>4}{row['locality_in']:>8}{row['n_out']:>8}"
              f"{row['locality_out']:>9}{status:>8}{secs:>7.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
