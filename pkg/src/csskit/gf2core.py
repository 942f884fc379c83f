"""Linear algebra over GF(2).

Matrices keep two views of the same data: a tuple of sorted column supports
per row (the sparse index) and a tuple of Python integers per row, where bit
``j`` of row ``i`` is entry ``(i, j)`` (the packed view used for elimination).
The packed view is built lazily.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


def int_to_support(x: int) -> tuple[int, ...]:
    """Sorted positions of the set bits of ``x``."""
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return tuple(out)


def support_to_int(support: Iterable[int]) -> int:
    x = 0
    for j in support:
        x ^= 1 << j
    return x


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class BitVector:
    """Binary vector of length ``n`` stored by its support."""

    n: int
    support: tuple[int, ...]

    def __post_init__(self):
        s = tuple(sorted(set(self.support)))
        if s and (s[0] < 0 or s[-1] >= self.n):
            raise ValueError(f"support {s} out of range for length {self.n}")
        object.__setattr__(self, "support", s)

    @classmethod
    def from_int(cls, n: int, x: int) -> "BitVector":
        return cls(n, int_to_support(x))

    @classmethod
    def from_dense(cls, arr) -> "BitVector":
        arr = np.asarray(arr).ravel()
        return cls(len(arr), tuple(int(j) for j in np.flatnonzero(arr % 2)))

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(n, ())

    def to_int(self) -> int:
        return support_to_int(self.support)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.uint8)
        out[list(self.support)] = 1
        return out

    @property
    def weight(self) -> int:
        return len(self.support)

    def __add__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise ValueError("length mismatch")
        return BitVector(self.n, tuple(set(self.support) ^ set(other.support)))

    def __str__(self):
        s = set(self.support)
        return "".join("1" if j in s else "0" for j in range(self.n))


class BitMatrix:
    """Immutable binary matrix."""

    __slots__ = ("_nrows", "_ncols", "_supports", "_rows", "_hash")

    def __init__(self, nrows: int, ncols: int, supports: Sequence[Iterable[int]] = ()):
        if nrows < 0 or ncols < 0:
            raise ValueError("negative dimension")
        sup = tuple(tuple(sorted(set(int(j) for j in s))) for s in supports)
        if len(sup) == 0 and nrows:
            sup = ((),) * nrows
        if len(sup) != nrows:
            raise ValueError(f"expected {nrows} rows, got {len(sup)}")
        for i, s in enumerate(sup):
            if s and (s[0] < 0 or s[-1] >= ncols):
                raise ValueError(f"row {i}: column index out of range for {ncols} columns")
        self._nrows = nrows
        self._ncols = ncols
        self._supports = sup
        self._rows = None
        self._hash = None

    # construction

    @classmethod
    def _trusted(cls, nrows, ncols, supports):
        m = cls.__new__(cls)
        m._nrows, m._ncols, m._supports = nrows, ncols, tuple(supports)
        m._rows = None
        m._hash = None
        return m

    @classmethod
    def from_rows(cls, ints: Sequence[int], ncols: int) -> "BitMatrix":
        for x in ints:
            if x < 0 or x.bit_length() > ncols:
                raise ValueError("row exceeds column count")
        m = cls._trusted(len(ints), ncols, [int_to_support(x) for x in ints])
        m._rows = tuple(ints)
        return m

    @classmethod
    def from_dense(cls, arr) -> "BitMatrix":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d array")
        arr = arr.astype(np.int64) % 2
        return cls._trusted(arr.shape[0], arr.shape[1],
                            [tuple(int(j) for j in np.flatnonzero(r)) for r in arr])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls._trusted(nrows, ncols, [()] * nrows)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls._trusted(n, n, [(i,) for i in range(n)])

    @classmethod
    def from_vectors(cls, vecs: Sequence[BitVector], ncols: int | None = None) -> "BitMatrix":
        if ncols is None:
            if not vecs:
                raise ValueError("column count needed for an empty list")
            ncols = vecs[0].n
        return cls(len(vecs), ncols, [v.support for v in vecs])

    # views

    @property
    def shape(self) -> tuple[int, int]:
        return (self._nrows, self._ncols)

    @property
    def nrows(self) -> int:
        return self._nrows

    @property
    def ncols(self) -> int:
        return self._ncols

    @property
    def supports(self) -> tuple[tuple[int, ...], ...]:
        return self._supports

    @property
    def rows(self) -> tuple[int, ...]:
        if self._rows is None:
            self._rows = tuple(support_to_int(s) for s in self._supports)
        return self._rows

    def row(self, i: int) -> BitVector:
        return BitVector(self._ncols, self._supports[i])

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        for i, s in enumerate(self._supports):
            out[i, list(s)] = 1
        return out

    def entries(self) -> set[tuple[int, int]]:
        return {(i, j) for i, s in enumerate(self._supports) for j in s}

    @property
    def nnz(self) -> int:
        return sum(len(s) for s in self._supports)

    def row_weights(self) -> list[int]:
        return [len(s) for s in self._supports]

    def col_weights(self) -> list[int]:
        w = [0] * self._ncols
        for s in self._supports:
            for j in s:
                w[j] += 1
        return w

    def max_row_weight(self) -> int:
        return max(self.row_weights(), default=0)

    def max_col_weight(self) -> int:
        return max(self.col_weights(), default=0)

    def columns(self) -> list[list[int]]:
        cols = [[] for _ in range(self._ncols)]
        for i, s in enumerate(self._supports):
            for j in s:
                cols[j].append(i)
        return cols

    @property
    def T(self) -> "BitMatrix":
        return BitMatrix._trusted(self._ncols, self._nrows, [tuple(c) for c in self.columns()])

    # structural helpers

    def select_rows(self, idx: Iterable[int]) -> "BitMatrix":
        idx = list(idx)
        return BitMatrix._trusted(len(idx), self._ncols, [self._supports[i] for i in idx])

    def select_cols(self, idx: Sequence[int]) -> "BitMatrix":
        """Submatrix on the given columns, renumbered in the given order."""
        pos = {c: k for k, c in enumerate(idx)}
        return BitMatrix(self._nrows, len(idx),
                         [[pos[j] for j in s if j in pos] for s in self._supports])

    def append_rows(self, supports: Iterable[Iterable[int]]) -> "BitMatrix":
        extra = [tuple(s) for s in supports]
        return vstack([self, BitMatrix(len(extra), self._ncols, extra)])

    def __eq__(self, other):
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and self._supports == other._supports

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.shape, self._supports))
        return self._hash

    def __repr__(self):
        return f"BitMatrix({self._nrows}x{self._ncols}, nnz={self.nnz})"

    def __str__(self):
        return "\n".join(str(self.row(i)) for i in range(self._nrows))


def vstack(mats: Sequence[BitMatrix]) -> BitMatrix:
    if not mats:
        raise ValueError("nothing to stack")
    ncols = mats[0].ncols
    if any(m.ncols != ncols for m in mats):
        raise ValueError("column counts differ")
    sup = [s for m in mats for s in m.supports]
    return BitMatrix._trusted(len(sup), ncols, sup)


def hstack(mats: Sequence[BitMatrix]) -> BitMatrix:
    if not mats:
        raise ValueError("nothing to stack")
    nrows = mats[0].nrows
    if any(m.nrows != nrows for m in mats):
        raise ValueError("row counts differ")
    sup = [[] for _ in range(nrows)]
    off = 0
    for m in mats:
        for i, s in enumerate(m.supports):
            sup[i].extend(j + off for j in s)
        off += m.ncols
    return BitMatrix._trusted(nrows, off, [tuple(s) for s in sup])


def block(grid: Sequence[Sequence[BitMatrix | None]], row_dims: Sequence[int], col_dims: Sequence[int]) -> BitMatrix:
    """Assemble a block matrix; ``None`` entries are zero blocks."""
    rows = []
    for bi, r in enumerate(row_dims):
        parts = []
        for bj, c in enumerate(col_dims):
            b = grid[bi][bj]
            if b is None:
                b = BitMatrix.zeros(r, c)
            if b.shape != (r, c):
                raise ValueError(f"block ({bi},{bj}) has shape {b.shape}, expected {(r, c)}")
            parts.append(b)
        rows.append(hstack(parts))
    return vstack(rows)


def matmul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Product over GF(2)."""
    if a.ncols != b.nrows:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    brows = b.rows
    out = []
    for s in a.supports:
        x = 0
        for j in s:
            x ^= brows[j]
        out.append(x)
    return BitMatrix.from_rows(out, b.ncols)


def matvec(a: BitMatrix, v: BitVector | int) -> int:
    """Syndrome ``a v`` packed as an integer (bit i = row i)."""
    x = v.to_int() if isinstance(v, BitVector) else v
    out = 0
    for i, r in enumerate(a.rows):
        if popcount(r & x) & 1:
            out |= 1 << i
    return out


def kronecker(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Left-major Kronecker product: entry (i*rb+k, j*cb+l) = a[i,j] b[k,l]."""
    rb, cb = b.shape
    sup = []
    for sa in a.supports:
        for sb in b.supports:
            sup.append(tuple(j * cb + l for j in sa for l in sb))
    return BitMatrix._trusted(a.nrows * rb, a.ncols * cb, sup)


class Echelon:
    """Incremental row-echelon basis; pivot of a stored row is its lowest set bit."""

    def __init__(self, rows: Iterable[int] = ()):
        self.pivots: dict[int, int] = {}
        for r in rows:
            self.add(r)

    def reduce(self, x: int) -> int:
        piv = self.pivots
        while x:
            low = x & -x
            p = piv.get(low)
            if p is None:
                return x
            x ^= p
        return 0

    def add(self, x: int) -> bool:
        """Insert ``x``; return True when it was independent."""
        x = self.reduce(x)
        if x:
            self.pivots[x & -x] = x
            return True
        return False

    def contains(self, x: int) -> bool:
        return self.reduce(x) == 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduced_rows(self) -> dict[int, int]:
        """Fully reduced basis keyed by pivot column index."""
        order = sorted(self.pivots)
        rows = {p: self.pivots[p] for p in order}
        for p in reversed(order):
            r = rows[p]
            for q in order:
                if q >= p:
                    break
                if rows[q] & p:
                    rows[q] ^= r
        return {p.bit_length() - 1: r for p, r in rows.items()}


def rank(m: BitMatrix) -> int:
    return Echelon(m.rows).rank


def rank_kernel(m: BitMatrix) -> tuple[int, list[BitVector]]:
    """Rank of ``m`` and a basis of its right kernel."""
    ech = Echelon(m.rows)
    red = ech.reduced_rows()
    n = m.ncols
    pivot_cols = set(red)
    kernel = []
    for f in range(n):
        if f in pivot_cols:
            continue
        bit = 1 << f
        x = bit
        for c, r in red.items():
            if r & bit:
                x |= 1 << c
        kernel.append(BitVector.from_int(n, x))
    return ech.rank, kernel


def kernel_ints(m: BitMatrix) -> list[int]:
    return [v.to_int() for v in rank_kernel(m)[1]]


def solve(m: BitMatrix, target: int) -> int | None:
    """Some ``x`` with ``m x = target`` (target packed by row), or None."""
    # eliminate on the transposed system: columns of m as packed ints
    cols = m.T.rows
    # track combinations of columns alongside column images
    ech: dict[int, tuple[int, int]] = {}
    for j, c in enumerate(cols):
        comb = 1 << j
        while c:
            low = c & -c
            hit = ech.get(low)
            if hit is None:
                ech[low] = (c, comb)
                break
            c ^= hit[0]
            comb ^= hit[1]
    t, x = target, 0
    while t:
        low = t & -t
        hit = ech.get(low)
        if hit is None:
            return None
        t ^= hit[0]
        x ^= hit[1]
    return x


def row_space_equal(a: BitMatrix, b: BitMatrix) -> bool:
    if a.ncols != b.ncols:
        raise ValueError("column counts differ")
    ea = Echelon(a.rows)
    if not all(ea.contains(r) for r in b.rows):
        return False
    eb = Echelon(b.rows)
    return all(eb.contains(r) for r in a.rows)


def in_row_space(m: BitMatrix, v: BitVector | int) -> bool:
    x = v.to_int() if isinstance(v, BitVector) else v
    return Echelon(m.rows).contains(x)
