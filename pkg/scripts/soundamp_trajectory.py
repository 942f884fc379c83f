"""Amplify the soundness of a ring-check code towards a constant target.

A single X-check ring on t qubits has soundness 4/t, so larger t starts
further from the target.

    python scripts/soundamp_trajectory.py --t 20 --target 1/2
"""

from __future__ import annotations

import argparse
from fractions import Fraction

from csskit.csscode import CssCode
from csskit.gf2core import BitMatrix
from csskit.soundamp import amplify_to_constant, side_soundness
from csskit.zoo import cyclic_pcm


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=int, nargs="+", default=[12, 16, 20])
    ap.add_argument("--target", type=Fraction, default=Fraction(1, 2))
    ap.add_argument("--alpha", type=Fraction, default=Fraction(1, 3))
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    for t in args.t:
        ring = CssCode(cyclic_pcm(t), BitMatrix.zeros(0, t))
        out, rounds = amplify_to_constant(ring, "x", args.target, args.alpha, seed=args.seed)
        traj = out.meta.get("soundamp_trajectory", {})
        rhos = " -> ".join(str(r) for r in traj.get("rho", [side_soundness(ring, "x")]))
        print(f"t={t:<3} rounds={rounds} checks {ring.n_x} -> {out.n_x} "
              f"weight {ring.h_x.max_row_weight()} -> {out.h_x.max_row_weight()} rho {rhos}")


if __name__ == "__main__":
    main()
