"""Exact brute-force oracles: coset distance, code distances, soundness.

Three exact strategies are used, whichever is cheapest for the instance:

* codeword side: enumerate an affine subspace ``x + span(B)`` (2^dim words);
* syndrome side: breadth-first search over the syndrome space of a check
  matrix, which yields the minimum coset weight of every syndrome at once
  (2^rank states);
* weight-bounded meet-in-the-middle for code distances: grows the target
  weight ``w`` and matches column subsets of size ``w/2``.

``budget`` caps log2 of the work; exceeding it raises ``BudgetExceeded``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from csskit.csscode import CssCode
from csskit.gf2core import BitMatrix, BitVector, Echelon, int_to_support, kernel_ints, matvec, popcount, rank_kernel

DEFAULT_BUDGET = 28
_CHUNK_BITS = 16
_MITM_MAX_COST = float(2 ** 22)  # bounds the in-memory subset tables


class BudgetExceeded(RuntimeError):
    pass


class NoLogicals(ValueError):
    pass


class UndefinedSoundness(ValueError):
    pass


# packed-word helpers


def _to_words(x: int, nwords: int) -> np.ndarray:
    return np.array([(x >> (64 * i)) & 0xFFFFFFFFFFFFFFFF for i in range(nwords)], dtype=np.uint64)


def _span_table(basis: list[int], nwords: int) -> np.ndarray:
    """All 2^len(basis) combinations, row c = XOR of basis[j] for bits j of c."""
    table = np.zeros((1, nwords), dtype=np.uint64)
    for b in basis:
        table = np.concatenate([table, table ^ _to_words(b, nwords)])
    return table


def _min_weight_affine(offsets: list[int], basis: list[int], n: int) -> tuple[int, int]:
    """Minimum weight over the union of ``o + span(basis)``; returns (weight, vector)."""
    nwords = max(1, (n + 63) // 64)
    lo, hi = basis[:_CHUNK_BITS], basis[_CHUNK_BITS:]
    table = _span_table(lo, nwords)
    best_w, best_v = None, None
    for o in offsets:
        cur = o
        for step in range(1 << len(hi)):
            if step:
                # Gray code: flip the basis vector indexed by the lowest set bit of step
                cur ^= hi[(step & -step).bit_length() - 1]
            block = table ^ _to_words(cur, nwords)
            w = np.bitwise_count(block).sum(axis=1, dtype=np.int64)
            i = int(np.argmin(w))
            if best_w is None or int(w[i]) < best_w:
                best_w = int(w[i])
                comb = 0
                for j in range(len(lo)):
                    if (i >> j) & 1:
                        comb ^= lo[j]
                best_v = cur ^ comb
                if best_w == 0:
                    return 0, best_v
    return best_w, best_v


# syndrome-side table


@dataclass
class SyndromeTable:
    """Minimum-weight coset leaders for every syndrome of a check matrix.

    States are syndromes restricted to a maximal independent set of rows
    (``basis_rows``); every other row's bit is a parity of those bits.
    """

    h: BitMatrix
    basis_rows: list[int]
    row_combos: list[int]  # row j's syndrome bit = parity(state & row_combos[j])
    gens: list[int]  # syndrome state contributed by each generator column
    gen_cols: list[int]
    dist: np.ndarray
    parent: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.basis_rows)

    def state_of(self, x: int) -> int:
        s = 0
        rows = self.h.rows
        for t, i in enumerate(self.basis_rows):
            if popcount(rows[i] & x) & 1:
                s |= 1 << t
        return s

    def leader(self, state: int) -> int:
        x = 0
        while state:
            g = int(self.parent[state])
            x ^= 1 << self.gen_cols[g]
            state ^= self.gens[g]
        return x

    def syndrome_weights(self) -> np.ndarray:
        """Weight of the full syndrome (all rows) for every state."""
        size = 1 << self.rank
        states = np.arange(size, dtype=np.uint64)
        counts: dict[int, int] = {}
        for c in self.row_combos:
            counts[c] = counts.get(c, 0) + 1
        w = np.zeros(size, dtype=np.int32)
        for c, mult in counts.items():
            if c == 0:
                continue
            par = (np.bitwise_count(states & np.uint64(c)) & 1).astype(np.int32)
            w += mult * par
        return w


def syndrome_table(h: BitMatrix, budget: int = DEFAULT_BUDGET) -> SyndromeTable:
    rows = h.rows
    # independent rows, tracking how every row decomposes over them
    piv: dict[int, tuple[int, int]] = {}
    basis_rows: list[int] = []
    combos: list[int] = []
    for i, r in enumerate(rows):
        comb = 0
        x = r
        while x:
            low = x & -x
            hit = piv.get(low)
            if hit is None:
                break
            x ^= hit[0]
            comb ^= hit[1]
        if x:
            t = len(basis_rows)
            basis_rows.append(i)
            comb ^= 1 << t
            piv[x & -x] = (x, comb)
            combos.append(1 << t)
        else:
            combos.append(comb)
    r = len(basis_rows)
    if r > budget:
        raise BudgetExceeded(f"syndrome space 2^{r} exceeds budget 2^{budget}")
    cols = h.columns()
    pos = {i: t for t, i in enumerate(basis_rows)}
    seen: dict[int, int] = {}
    gens: list[int] = []
    gen_cols: list[int] = []
    for j, c in enumerate(cols):
        g = 0
        for i in c:
            t = pos.get(i)
            if t is not None:
                g |= 1 << t
        if g and g not in seen:
            seen[g] = len(gens)
            gens.append(g)
            gen_cols.append(j)
    size = 1 << r
    dist = np.full(size, -1, dtype=np.int16)
    parent = np.full(size, -1, dtype=np.int32)
    dist[0] = 0
    frontier = np.zeros(1, dtype=np.int64)
    layer = 0
    garr = np.array(gens, dtype=np.int64)
    while frontier.size:
        layer += 1
        new_parts = []
        for gi in range(len(garr)):
            nb = frontier ^ garr[gi]
            nb = nb[dist[nb] < 0]
            if nb.size:
                dist[nb] = layer
                parent[nb] = gi
                new_parts.append(nb)
        frontier = np.concatenate(new_parts) if new_parts else np.zeros(0, dtype=np.int64)
    return SyndromeTable(h, basis_rows, combos, gens, gen_cols, dist, parent)


# coset distance


def coset_distance(h: BitMatrix, x: BitVector | int, budget: int = DEFAULT_BUDGET, method: str = "auto") -> int:
    """``d(x, ker h) = min |z|`` over ``x + z`` in ``ker h``."""
    n = h.ncols
    xi = x.to_int() if isinstance(x, BitVector) else x
    if isinstance(x, BitVector) and x.n != n:
        raise ValueError("length mismatch")
    r, ker = rank_kernel(h)
    dim = n - r
    if method == "auto":
        method = "codeword" if dim <= r else "syndrome"
    if method == "codeword":
        if dim > budget:
            raise BudgetExceeded(f"coset enumeration 2^{dim} exceeds budget 2^{budget}")
        return _min_weight_affine([xi], [v.to_int() for v in ker], n)[0]
    if method == "syndrome":
        tab = syndrome_table(h, budget)
        return int(tab.dist[tab.state_of(xi)])
    raise ValueError(f"unknown method {method!r}")


# distances


def _logical_reps(h_comm: BitMatrix, h_stab: BitMatrix) -> list[int]:
    """Basis of ker(h_comm) modulo rowspace(h_stab), as packed ints."""
    ech = Echelon(h_stab.rows)
    reps = []
    for v in kernel_ints(h_comm):
        if ech.add(v):
            reps.append(v)
    return reps


def _side_mats(code: CssCode, side: str) -> tuple[BitMatrix, BitMatrix]:
    """(commuting checks, stabilisers) for logicals of the given Pauli type."""
    if side == "z":
        return code.h_x, code.h_z
    if side == "x":
        return code.h_z, code.h_x
    raise ValueError(f"side must be 'x' or 'z', got {side!r}")


def _mitm_min_weight(syn: list[int], lab: list[int], max_weight: int, max_cost: float):
    """Smallest w <= max_weight with a column set of size w whose syndromes cancel
    and whose labels do not; returns (w, support) or None, or raises BudgetExceeded.

    Rounds run in increasing w, so a hit at w has exactly weight w."""
    n = len(syn)
    cost = 0.0
    tables: dict[int, dict[int, list]] = {}

    def table(h):
        if h not in tables:
            t: dict[int, list] = {}
            for comb in combinations(range(n), h):
                s = l = 0
                for j in comb:
                    s ^= syn[j]
                    l ^= lab[j]
                e = t.get(s)
                if e is None:
                    t[s] = [l, comb, None]
                elif e[2] is None and e[0] != l:
                    e[2] = (l, comb)
            tables[h] = t
        return tables[h]

    for w in range(1, max_weight + 1):
        h1, h2 = (w + 1) // 2, w // 2
        cost += math.comb(n, h1) + math.comb(n, h2)
        if cost > max_cost:
            raise BudgetExceeded(f"weight-{w} search exceeds budget")
        t2 = table(h2)
        for comb in combinations(range(n), h1):
            s = l = 0
            for j in comb:
                s ^= syn[j]
                l ^= lab[j]
            e = t2.get(s)
            if e is None:
                continue
            if e[0] != l:
                other = e[1]
            elif e[2] is not None:
                other = e[2][1]
            else:
                continue
            return w, tuple(sorted(set(comb) ^ set(other)))
        # tables for sizes below the next round's halves are no longer needed
        for key in [key for key in tables if key < w // 2]:
            del tables[key]
    return None


def _combos(reps: list[int]):
    for c in range(1, 1 << len(reps)):
        o = 0
        for t, r in enumerate(reps):
            if (c >> t) & 1:
                o ^= r
        yield o


def min_weight_logical(code: CssCode, side: str, budget: int = DEFAULT_BUDGET, method: str = "auto") -> BitVector:
    """A minimum-weight nontrivial logical of the given Pauli type.

    ``method`` forces one strategy ("mitm", "codeword", "syndrome"); "auto"
    tries the weight-bounded search within the cost of the cheaper
    enumeration and falls back to that enumeration.
    """
    n = code.n
    h_comm, h_stab = _side_mats(code, side)
    reps = _logical_reps(h_comm, h_stab)
    if not reps:
        raise NoLogicals("code has no logical qubits")
    k = len(reps)
    r_stab = Echelon(h_stab.rows).rank
    e_word = r_stab + k  # enumerate ker(h_comm) minus the stabiliser coset
    e_syn = n - r_stab  # search the syndrome space of a check matrix for rowspace(h_stab)
    e_best = min(e_word, e_syn)

    if method in ("auto", "mitm"):
        other = _logical_reps(*_side_mats(code, "x" if side == "z" else "z"))
        syn = [sum(1 << i for i in c) for c in h_comm.columns()]
        lab = [0] * n
        for t, L in enumerate(other):
            for j in int_to_support(L):
                lab[j] |= 1 << t
        cap = float(2 ** budget)
        if method == "auto":
            cap = min(cap, float(2 ** min(e_best, budget + 1)), _MITM_MAX_COST)
        try:
            hit = _mitm_min_weight(syn, lab, n, cap)
        except BudgetExceeded:
            if method == "mitm" or e_best > budget:
                raise
            hit = None
        if hit is not None:
            return BitVector(n, hit[1])
        if method == "mitm":
            raise AssertionError("nontrivial logical exists but was not found")
        method = "codeword" if e_word <= e_syn else "syndrome"

    if method == "codeword":
        if e_word > budget:
            raise BudgetExceeded(f"codeword enumeration 2^{e_word} exceeds budget 2^{budget}")
        stab_basis = list(Echelon(h_stab.rows).pivots.values())
        _, v = _min_weight_affine(list(_combos(reps)), stab_basis, n)
        return BitVector.from_int(n, v)
    if method == "syndrome":
        g = BitMatrix.from_rows(kernel_ints(h_stab), n)
        tab = syndrome_table(g, budget)
        best = None
        for o in _combos(reps):
            st = tab.state_of(o)
            d = int(tab.dist[st])
            if best is None or d < best[0]:
                best = (d, tab.leader(st))
        return BitVector.from_int(n, best[1])
    raise ValueError(f"unknown method {method!r}")


def side_distance(code: CssCode, side: str, budget: int = DEFAULT_BUDGET, method: str = "auto") -> int:
    return min_weight_logical(code, side, budget, method).weight


def distance_at_least(code: CssCode, side: str, w: int, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff every nontrivial logical of the given type has weight >= w.

    Exact: runs the weight-bounded search up to w - 1 only, which stays
    cheap on large codes whose distance is far above w.
    """
    h_comm, h_stab = _side_mats(code, side)
    if not _logical_reps(h_comm, h_stab):
        raise NoLogicals("code has no logical qubits")
    other = _logical_reps(*_side_mats(code, "x" if side == "z" else "z"))
    syn = [sum(1 << i for i in c) for c in h_comm.columns()]
    lab = [0] * code.n
    for t, L in enumerate(other):
        for j in int_to_support(L):
            lab[j] |= 1 << t
    return _mitm_min_weight(syn, lab, w - 1, float(2 ** budget)) is None


def brute_distance(code: CssCode, budget: int = DEFAULT_BUDGET) -> tuple[int, int]:
    """Exact (d_x, d_z)."""
    return side_distance(code, "x", budget), side_distance(code, "z", budget)


# soundness


@dataclass(frozen=True)
class SoundnessWitness:
    rho: Fraction
    witness: BitVector
    violated: int
    distance: int
    rows: int
    cols: int

    def ratio(self) -> Fraction:
        return Fraction(self.violated * self.cols, self.rows * self.distance)


def brute_soundness(h: BitMatrix, budget: int = DEFAULT_BUDGET) -> SoundnessWitness:
    """Exact min over x outside ker h of (|hx|/s) / (d(x, ker h)/t)."""
    s, t = h.shape
    if not any(h.supports):
        raise UndefinedSoundness("every word is a codeword; soundness is undefined")
    tab = syndrome_table(h, budget)
    w = tab.syndrome_weights()
    dist = tab.dist.astype(np.int64)
    best = None
    for d in range(1, int(dist.max()) + 1):
        idx = np.flatnonzero(dist == d)
        if not idx.size:
            continue
        j = int(idx[np.argmin(w[idx])])
        cand = Fraction(int(w[j]) * t, s * d)
        if best is None or cand < best[0]:
            best = (cand, j, d)
    rho, state, d = best
    x = tab.leader(state)
    return SoundnessWitness(rho, BitVector.from_int(t, x), popcount(matvec(h, x)), d, s, t)


def quantum_soundness(code: CssCode, budget: int = DEFAULT_BUDGET) -> tuple[SoundnessWitness, SoundnessWitness]:
    """(rho_x, rho_z): rho_x from the Z-checks, rho_z from the X-checks."""
    return brute_soundness(code.h_z, budget), brute_soundness(code.h_x, budget)
