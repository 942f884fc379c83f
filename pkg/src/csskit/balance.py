"""Homological products with a classical code's dual complex."""

from __future__ import annotations

from dataclasses import dataclass

from csskit.csscode import ChainComplex, CssCode, chain_css, css_from_chain, dual
from csskit.gf2core import BitMatrix, block, kronecker, rank


@dataclass(frozen=True)
class ClassicalCode:
    """Classical code ker(h) with ``h`` of shape s x t."""

    h: BitMatrix

    @property
    def s(self) -> int:
        return self.h.nrows

    @property
    def t(self) -> int:
        return self.h.ncols

    @property
    def independent_checks(self) -> bool:
        return rank(self.h) == self.s

    @property
    def dim(self) -> int:
        return self.t - rank(self.h)

    def distance(self, budget: int = 28) -> int:
        from csskit.oracle import side_distance

        return side_distance(CssCode(self.h, BitMatrix.zeros(0, self.t)), "z", budget=budget)

    def dual_complex(self) -> ChainComplex:
        """R* = (F^s --h^T--> F^t), with F^t in degree 0."""
        return ChainComplex((self.t, self.s), (self.h.T,))


def _summands(c: ChainComplex, r: ChainComplex, p: int) -> list[tuple[int, int]]:
    """(i, p - i) pairs of degree p, ordered by decreasing i."""
    out = []
    for i in range(min(p, len(c) - 1), -1, -1):
        j = p - i
        if 0 <= j < len(r):
            out.append((i, j))
    return out


def homological_product(c: ChainComplex, r: ChainComplex) -> ChainComplex:
    """Tensor product complex, degree p = sum_i c_i (x) r_{p-i}.

    Inside each summand the basis element u (x) v sits at u * dim(r_j) + v.
    """
    top = len(c) + len(r) - 2
    layout = [_summands(c, r, p) for p in range(top + 1)]
    dims = tuple(sum(c.dims[i] * r.dims[j] for i, j in lay) for lay in layout)
    bds = []
    for p in range(1, top + 1):
        lo, hi = layout[p - 1], layout[p]
        grid: list[list[BitMatrix | None]] = [[None] * len(hi) for _ in lo]
        for b, (i, j) in enumerate(hi):
            for a, (i2, j2) in enumerate(lo):
                if (i2, j2) == (i - 1, j):
                    grid[a][b] = kronecker(c.boundaries[i - 1], BitMatrix.identity(r.dims[j]))
                elif (i2, j2) == (i, j - 1):
                    grid[a][b] = kronecker(BitMatrix.identity(c.dims[i]), r.boundaries[j - 1])
        bds.append(block(grid, [c.dims[i] * r.dims[j] for i, j in lo], [c.dims[i] * r.dims[j] for i, j in hi]))
    return ChainComplex(dims, tuple(bds))


def distance_balance(code: CssCode, r: ClassicalCode) -> CssCode:
    """Product of the code's complex with R*, read off in degrees 0..2.

    Qubits are ``n (x) t`` followed by ``n_x (x) s``; Z-checks are
    ``n_z (x) t`` followed by ``n (x) s``; X-checks are ``n_x (x) t``.
    """
    if not r.independent_checks:
        raise ValueError("classical code must have independent checks")
    prod = homological_product(chain_css(code), r.dual_complex())
    out = css_from_chain(prod, 0)
    return CssCode(out.h_x, out.h_z, {
        "family": "balanced",
        "layout": {"n": code.n, "n_x": code.n_x, "n_z": code.n_z, "t": r.t, "s": r.s},
    })


def double_distance_balance(code: CssCode, r: ClassicalCode) -> CssCode:
    once = distance_balance(code, r)
    twice = dual(distance_balance(dual(once), r))
    return twice.with_meta(family="double_balanced")
