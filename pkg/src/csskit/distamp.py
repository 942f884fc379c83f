"""AEL distance amplification: concatenate, permute along a pseudorandom graph, concatenate again.

Qubit ``j`` of block ``u`` sits at ``u * block_size + j`` throughout.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from csskit.csscode import CssCode, validate
from csskit.gf2core import BitMatrix, popcount
from csskit.oracle import _logical_reps


@dataclass(frozen=True)
class LogicalBasis:
    """Paired logical representatives: x[i] overlaps z[j] oddly iff i == j."""

    n: int
    x: tuple[int, ...]
    z: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.x)

    def pairing(self) -> list[list[int]]:
        return [[popcount(a & b) & 1 for b in self.z] for a in self.x]


def logical_basis(code: CssCode) -> LogicalBasis:
    """Symplectic Gram-Schmidt over logical representatives.

    X-logicals come from ker(h_z) modulo rowspace(h_x), Z-logicals from
    ker(h_x) modulo rowspace(h_z).  With no checks at all this returns the
    unit vectors in order, so the trivial code encodes as the identity.
    """
    xs = _logical_reps(code.h_z, code.h_x)
    zs = _logical_reps(code.h_x, code.h_z)
    if not xs:
        raise ValueError("code has no logical qubits")
    out_x, out_z = [], []
    while xs:
        x = xs.pop(0)
        j = next((j for j, z in enumerate(zs) if popcount(x & z) & 1), None)
        if j is None:
            raise AssertionError("logical representatives are not symplectically paired")
        z = zs.pop(j)
        xs = [v ^ x if popcount(v & z) & 1 else v for v in xs]
        zs = [v ^ z if popcount(v & x) & 1 else v for v in zs]
        out_x.append(x)
        out_z.append(z)
    return LogicalBasis(code.n, tuple(out_x), tuple(out_z))


def _encode_rows(rows, k_in: int, n_in: int, reps: tuple[int, ...]) -> list[int]:
    out = []
    for r in rows:
        acc = 0
        for q in _bits(r):
            blk, j = divmod(q, k_in)
            acc ^= reps[j] << (blk * n_in)
        out.append(acc)
    return out


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _replicate(rows, n_in: int, b: int) -> list[int]:
    return [r << (blk * n_in) for blk in range(b) for r in rows]


def concatenate_css(outer: CssCode, inner: CssCode, blocks: int) -> CssCode:
    """Encode consecutive runs of K_in outer qubits into copies of ``inner``.

    Rows are ordered: encoded outer X-checks, then inner X-checks block by
    block (same for Z).  Each Pauli on outer qubit ``(u, j)`` becomes the
    j-th logical representative on block ``u``.
    """
    basis = logical_basis(inner) if inner.n else None
    k_in = basis.k if basis else 0
    if k_in == 0 or blocks * k_in != outer.n:
        raise ValueError(f"need blocks * K_in == N_out, got {blocks} * {k_in} != {outer.n}")
    n_in = inner.n
    n = blocks * n_in
    hx = _encode_rows(outer.h_x.rows, k_in, n_in, basis.x) + _replicate(inner.h_x.rows, n_in, blocks)
    hz = _encode_rows(outer.h_z.rows, k_in, n_in, basis.z) + _replicate(inner.h_z.rows, n_in, blocks)
    meta = {"stage": "concatenated", "concat": {"blocks": blocks, "k_in": k_in, "n_in": n_in,
                                                "outer_x": outer.n_x, "outer_z": outer.n_z}}
    return CssCode(BitMatrix.from_rows(hx, n), BitMatrix.from_rows(hz, n), meta)


# pseudorandom permutations


@dataclass(frozen=True)
class PermGraph:
    """N_in-regular bipartite multigraph on b + b vertices.

    ``targets[u * n_in + j] = (v, j')`` says the j-th edge leaving left vertex
    u is the j'-th edge arriving at right vertex v.
    """

    b: int
    n_in: int
    targets: tuple[tuple[int, int], ...]
    eps: float
    seed: int | None = None

    def permutation(self) -> list[int]:
        return [v * self.n_in + jj for v, jj in self.targets]

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.b, self.b), dtype=np.int64)
        for p, (v, _) in enumerate(self.targets):
            a[p // self.n_in, v] += 1
        return a


def identity_graph(b: int, n_in: int, eps: float = 1.0) -> PermGraph:
    return PermGraph(b, n_in, tuple((u, j) for u in range(b) for j in range(n_in)), eps)


def _number_edges(b: int, n_in: int, heads: list[int]) -> tuple[tuple[int, int], ...]:
    seen = [0] * b
    out = []
    for v in heads:
        out.append((v, seen[v]))
        seen[v] += 1
    return tuple(out)


@dataclass
class PseudorandomReport:
    ok: bool
    eps: float
    measured_eps: float
    worst_s: tuple[int, ...]
    worst_t: tuple[int, ...]
    deviation: float


def _masks_to_sets(b: int):
    idx = np.arange(1 << b)
    return ((idx[:, None] >> np.arange(b)[None, :]) & 1).astype(np.int64)


def verify_pseudorandom(g: PermGraph, eps: float | None = None, max_b: int = 14) -> PseudorandomReport:
    """Exhaustive check of | |E(S,T)| - N_in|S||T|/b | <= eps N_in sqrt(|S||T|) over all S, T.

    ``measured_eps`` is the smallest eps the graph satisfies.
    """
    eps = g.eps if eps is None else eps
    if g.b > max_b:
        raise ValueError(f"exhaustive check over 4^{g.b} pairs exceeds max_b={max_b}")
    a = g.adjacency().astype(np.float64)
    ind = _masks_to_sets(g.b).astype(np.float64)
    size = ind.sum(axis=1)
    rows = ind @ a
    best = (0.0, 0, 0, 0.0)
    chunk = max(1, (1 << 22) >> g.b)
    for lo in range(1, 1 << g.b, chunk):
        hi = min(1 << g.b, lo + chunk)
        e = rows[lo:hi] @ ind.T
        ss = size[lo:hi, None] * size[None, :]
        dev = np.abs(e - g.n_in * ss / g.b)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(ss > 0, dev / (g.n_in * np.sqrt(ss)), 0.0)
        i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
        if ratio[i, j] > best[0]:
            best = (float(ratio[i, j]), lo + int(i), int(j), float(dev[i, j]))
    r, s, t, dev = best
    bits = lambda m: tuple(u for u in range(g.b) if m >> u & 1)
    return PseudorandomReport(r <= eps + 1e-12, eps, r, bits(s), bits(t), dev)


def sample_pseudorandom_graph(b: int, n_in: int, eps: float, seed: int = 0, retries: int = 32,
                              check: bool = True) -> PermGraph:
    """Half-edge matching, resampled until the exhaustive check passes.

    Sampling needs N_in >= 4 / eps^2.  Set ``check=False`` to skip
    verification when b is too large to enumerate.
    """
    if n_in < 4 / eps ** 2:
        raise ValueError(f"n_in={n_in} below 4/eps^2={4 / eps ** 2:.2f}")
    for attempt in range(retries):
        s = seed * 104729 + attempt
        heads = [v for v in range(b) for _ in range(n_in)]
        random.Random(s).shuffle(heads)
        g = PermGraph(b, n_in, _number_edges(b, n_in, heads), eps, s)
        if not check or verify_pseudorandom(g).ok:
            return g
    raise RuntimeError(f"no {eps}-pseudorandom graph in {retries} samples")


def counting_violations(g: PermGraph, alpha_in: float, alpha_out: float, eps: float | None = None) -> list[tuple[int, ...]]:
    """Sets T within the size cap whose heavy preimage exceeds alpha_out * b.

    A left block is heavy for T when more than alpha_in * N_in of its edges
    land in T.  The cap is (alpha_in - eps sqrt(alpha_in/alpha_out)) b.
    """
    eps = g.eps if eps is None else eps
    cap = (alpha_in - eps * math.sqrt(alpha_in / alpha_out)) * g.b
    if cap < 0:
        return []
    a = g.adjacency()
    ind = _masks_to_sets(g.b)
    size = ind.sum(axis=1)
    into = ind @ a.T  # into[T, u] = edges from u into T
    heavy = (into > alpha_in * g.n_in).sum(axis=1)
    bad = np.flatnonzero((size <= cap + 1e-12) & (heavy > alpha_out * g.b + 1e-12))
    return [tuple(v for v in range(g.b) if m >> v & 1) for m in bad]


def relative_distance_bound(d_block: float, d_in: float, d_out: float, eps: float) -> float:
    """Lower bound on the relative distance of the amplified code."""
    return d_block * (d_in / 2 - eps * math.sqrt(d_in / d_out))


def soundness_alpha(rho_hat: Fraction, n_in: int, k_in: int, w_out: int) -> Fraction:
    rho_hat = Fraction(rho_hat)
    return rho_hat / (n_in * k_in * w_out + rho_hat + k_in * (1 + n_in) * (rho_hat + w_out) + 1)


def soundness_bound(n: int, n_checks: int, alpha: Fraction, n_in: int, n_block: int) -> Fraction:
    """(N / N_checks) * alpha / (N_in N_block)."""
    return Fraction(n, n_checks) * alpha / (n_in * n_block)


def permute_qubits(code: CssCode, perm: list[int]) -> CssCode:
    def move(m: BitMatrix) -> BitMatrix:
        return BitMatrix(m.nrows, m.ncols, [[perm[q] for q in s] for s in m.supports])
    return CssCode(move(code.h_x), move(code.h_z), dict(code.meta))


def ael_amplify(outer: CssCode, inner: CssCode, block: CssCode, graph: PermGraph) -> CssCode:
    """Concatenate with ``inner``, permute along ``graph``, concatenate with ``block``."""
    k_block = block.k
    if k_block != inner.n:
        raise ValueError(f"block code must encode N_in={inner.n} qubits, it encodes {k_block}")
    if graph.n_in != inner.n:
        raise ValueError(f"graph degree {graph.n_in} != N_in {inner.n}")
    cat = concatenate_css(outer, inner, graph.b)
    perm = permute_qubits(cat, graph.permutation())
    out = concatenate_css(perm, block, graph.b)
    rep = validate(out)
    if not rep.ok:
        raise AssertionError("amplified code does not commute")
    w_out = max(outer.h_x.max_row_weight(), outer.h_z.max_row_weight(),
                outer.h_x.max_col_weight(), outer.h_z.max_col_weight())
    w = max(out.h_x.max_row_weight(), out.h_z.max_row_weight(), out.h_x.max_col_weight(), out.h_z.max_col_weight())
    meta = {
        "stage": "ael",
        "ael": {
            "b": graph.b, "n_in": inner.n, "k_in": inner.k, "n_block": block.n, "eps": graph.eps,
            "n_cat": cat.n, "locality": w, "locality_out": w_out,
            "locality_constant": str(Fraction(w, max(w_out, 1) * inner.n ** 2)),
        },
    }
    return CssCode(out.h_x, out.h_z, meta)
