"""Deterministic constructors for the test codes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from csskit.csscode import CssCode
from csskit.gf2core import BitMatrix, hstack, kernel_ints, kronecker


def repetition_pcm(t: int) -> BitMatrix:
    """(t-1) x t banded checks, row i = {i, i+1}."""
    if t < 1:
        raise ValueError("t must be at least 1")
    return BitMatrix(t - 1, t, [(i, i + 1) for i in range(t - 1)])


def cyclic_pcm(t: int) -> BitMatrix:
    """t x t cyclic repetition checks, row i = {i, i+1 mod t}."""
    if t < 2:
        raise ValueError("t must be at least 2")
    return BitMatrix(t, t, [(i, (i + 1) % t) for i in range(t)])


def hypergraph_product(h1: BitMatrix, h2: BitMatrix) -> CssCode:
    """H_X = [H1 x I | I x H2^T], H_Z = [I x H2 | H1^T x I]."""
    r1, n1 = h1.shape
    r2, n2 = h2.shape
    h_x = hstack([kronecker(h1, BitMatrix.identity(n2)), kronecker(BitMatrix.identity(r1), h2.T)])
    h_z = hstack([kronecker(BitMatrix.identity(n1), h2), kronecker(h1.T, BitMatrix.identity(r2))])
    return CssCode(h_x, h_z, {"family": "hypergraph_product"})


def toric_code(L: int) -> CssCode:
    """Periodic L x L toric code: n = 2L^2, k = 2, d = L."""
    if L < 2:
        raise ValueError("L must be at least 2")
    c = hypergraph_product(cyclic_pcm(L), cyclic_pcm(L))
    return CssCode(c.h_x, c.h_z, {"family": "toric", "L": L})


def surface_code(d: int) -> CssCode:
    """Open-boundary surface code, k = 1, d_x = d_z = d."""
    if d < 2:
        raise ValueError("d must be at least 2")
    c = hypergraph_product(repetition_pcm(d), repetition_pcm(d))
    return CssCode(c.h_x, c.h_z, {"family": "surface", "d": d})


def cross_code(h_hat: BitMatrix) -> CssCode:
    """H_Z = [I | I], H_X = [H | H] on 2n qubits."""
    n = h_hat.ncols
    h_z = hstack([BitMatrix.identity(n), BitMatrix.identity(n)])
    h_x = hstack([h_hat, h_hat])
    return CssCode(h_x, h_z, {"family": "cross"})


def random_css(n: int, n_x: int, n_z: int, seed: int) -> CssCode:
    """Random Z-checks; X-checks are random combinations of ker(h_z)."""
    if n < 1 or n_x < 0 or n_z < 0:
        raise ValueError("infeasible dimensions")
    rng = np.random.default_rng(seed)
    hz = rng.integers(0, 2, size=(n_z, n), dtype=np.uint8)
    h_z = BitMatrix.from_dense(hz)
    ker = kernel_ints(h_z)
    if n_x and not ker:
        raise ValueError("ker(h_z) is trivial; no nonzero X-checks exist")
    rows = []
    for _ in range(n_x):
        coeff = rng.integers(0, 2, size=len(ker))
        if not coeff.any():
            coeff[rng.integers(len(ker))] = 1
        x = 0
        for c, v in zip(coeff, ker):
            if c:
                x ^= v
        rows.append(x)
    return CssCode(BitMatrix.from_rows(rows, n), h_z, {"family": "random_css", "seed": seed})


@dataclass(frozen=True)
class ZooSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def build(self) -> CssCode:
        p = self.params
        if self.family == "toric":
            return toric_code(p["L"])
        if self.family == "surface":
            return surface_code(p["d"])
        if self.family == "hypergraph_product":
            return hypergraph_product(repetition_pcm(p["t1"]), repetition_pcm(p.get("t2", p["t1"])))
        if self.family == "cross":
            return cross_code(repetition_pcm(p["t"]))
        if self.family == "random_css":
            return random_css(p["n"], p["n_x"], p["n_z"], self.seed or 0)
        if self.family == "repetition":
            t = p["t"]
            return CssCode(BitMatrix.zeros(0, t), repetition_pcm(t), {"family": "repetition"})
        raise ValueError(f"unknown family {self.family!r}")

    @property
    def label(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.family}({inner})"


def zoo_suite() -> list[ZooSpec]:
    """The small codes every transform is exercised on."""
    return [
        ZooSpec("toric", {"L": 2}),
        ZooSpec("toric", {"L": 3}),
        ZooSpec("surface", {"d": 3}),
        ZooSpec("surface", {"d": 4}),
        ZooSpec("hypergraph_product", {"t1": 3}),
        ZooSpec("hypergraph_product", {"t1": 4}),
        ZooSpec("cross", {"t": 3}),
    ]
