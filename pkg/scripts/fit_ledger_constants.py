"""Fit the hidden constants of the weight-reduction ledger and freeze them.

Runs the full pipeline on a small family, evaluates every bound with all
constants set to 1, and records the extreme measured/formula ratios.  Upper
constants are rounded up and lower ones down to three decimals.  Soundness
rows with no measured data keep constant 1.

    python scripts/fit_ledger_constants.py [--out src/csskit/data/ledger_constants.json]
"""

from __future__ import annotations

import argparse
import json
import math
from pathlib import Path

from csskit.weightred import WeightReductionConfig, parameter_ledger, weight_reduce_full
from csskit.zoo import ZooSpec

FAMILY = [ZooSpec("surface", {"d": 3}), ZooSpec("toric", {"L": 2}), ZooSpec("toric", {"L": 3})]


class _Ones(dict):
    def get(self, key, default=None):
        return 1.0


def fit(family=FAMILY, budget: int = 24) -> dict[str, float]:
    lo: dict[str, float] = {}
    hi: dict[str, float] = {}
    seen: set[str] = set()
    for spec in family:
        final, ledger = weight_reduce_full(spec.build(), WeightReductionConfig(budget=budget))
        params = {row.stage: row.params for row in ledger}
        for row in parameter_ledger(params, _Ones(), l1=final.meta["l1"], l2=final.meta["l2"]):
            for chk in row.checks:
                if chk.constant is None:
                    continue
                seen.add(chk.constant)
                if chk.measured is None or chk.bound is None or chk.bound <= 0:
                    continue
                r = chk.measured / chk.bound
                if chk.relation == "<=":
                    hi[chk.constant] = max(hi.get(chk.constant, 0.0), r)
                else:
                    lo[chk.constant] = min(lo.get(chk.constant, math.inf), r)
    out = {}
    for key in sorted(seen):
        if key in hi:
            out[key] = math.ceil(hi[key] * 1000) / 1000
        elif key in lo:
            out[key] = math.floor(lo[key] * 1000) / 1000
        else:
            out[key] = 1.0
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "src/csskit/data/ledger_constants.json")
    ap.add_argument("--budget", type=int, default=24)
    args = ap.parse_args()
    consts = fit(budget=args.budget)
    args.out.write_text(json.dumps(consts, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(consts)} constants to {args.out}")


if __name__ == "__main__":
    main()
