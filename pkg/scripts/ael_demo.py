"""Distance amplification of the d=3 surface code through a [[4,1,2]] inner code.

Samples pseudorandom graphs for several seeds, measures their eps, and
compares the distance of the result with the lower bound.

    python scripts/ael_demo.py --seeds 5
"""

from __future__ import annotations

import argparse

from csskit.csscode import CssCode, measure
from csskit.distamp import ael_amplify, relative_distance_bound, sample_pseudorandom_graph, verify_pseudorandom
from csskit.gf2core import BitMatrix
from csskit.zoo import surface_code

INNER = CssCode(BitMatrix.from_dense([[1, 1, 1, 1]]), BitMatrix.from_dense([[1, 1, 0, 0], [0, 0, 1, 1]]))
TRIVIAL4 = CssCode(BitMatrix.zeros(0, 4), BitMatrix.zeros(0, 4))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()

    outer = surface_code(3)
    for seed in range(args.seeds):
        g = sample_pseudorandom_graph(outer.n, INNER.n, 1.0, seed=seed, check=False)
        eps = verify_pseudorandom(g).measured_eps
        out = ael_amplify(outer, INNER, TRIVIAL4, g)
        p = measure(out)
        bound = relative_distance_bound(1 / 4, 2 / 4, 3 / 13, eps)
        print(f"seed={seed} eps={eps:.3f} n={p.n} k={p.k} d=({p.d_x},{p.d_z}) "
              f"locality={p.locality} rel_d={min(p.d_x, p.d_z) / p.n:.3f} bound={bound:.3f}")


if __name__ == "__main__":
    main()
