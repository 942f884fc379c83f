"""CSS codes, their chain complexes and measured parameters."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

from csskit.gf2core import BitMatrix, matmul, rank


@dataclass(frozen=True)
class CssCode:
    """A pair of parity-check matrices acting on the same ``n`` qubits.

    ``meta`` carries construction bookkeeping (stage tags, block layouts) that
    later transforms need; it does not take part in equality.
    """

    h_x: BitMatrix
    h_z: BitMatrix
    meta: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.h_x.ncols != self.h_z.ncols:
            raise ValueError(f"h_x has {self.h_x.ncols} columns but h_z has {self.h_z.ncols}")

    @property
    def n(self) -> int:
        return self.h_x.ncols

    @property
    def n_x(self) -> int:
        return self.h_x.nrows

    @property
    def n_z(self) -> int:
        return self.h_z.nrows

    @property
    def k(self) -> int:
        return self.n - rank(self.h_x) - rank(self.h_z)

    def with_meta(self, **kw) -> "CssCode":
        meta = dict(self.meta)
        meta.update(kw)
        return CssCode(self.h_x, self.h_z, meta)


@dataclass
class ValidationReport:
    anticommuting: list[tuple[int, int]]
    zero_x_rows: list[int]
    zero_z_rows: list[int]

    @property
    def ok(self) -> bool:
        return not self.anticommuting

    def __bool__(self):
        return self.ok


def validate(code: CssCode) -> ValidationReport:
    """List every (X-row, Z-row) pair with odd overlap."""
    prod = matmul(code.h_x, code.h_z.T)
    bad = [(i, j) for i, s in enumerate(prod.supports) for j in s]
    zx = [i for i, s in enumerate(code.h_x.supports) if not s]
    zz = [i for i, s in enumerate(code.h_z.supports) if not s]
    return ValidationReport(bad, zx, zz)


def dual(code: CssCode) -> CssCode:
    return CssCode(code.h_z, code.h_x, dict(code.meta))


@dataclass(frozen=True)
class ChainComplex:
    """Spaces indexed by degree; ``boundaries[i]`` maps degree i+1 to degree i."""

    dims: tuple[int, ...]
    boundaries: tuple[BitMatrix, ...]

    def __post_init__(self):
        dims, bd = tuple(self.dims), tuple(self.boundaries)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "boundaries", bd)
        if len(bd) != max(len(dims) - 1, 0):
            raise ValueError("need one boundary map between consecutive spaces")
        for i, b in enumerate(bd):
            if b.shape != (dims[i], dims[i + 1]):
                raise ValueError(f"boundary {i} has shape {b.shape}, expected {(dims[i], dims[i + 1])}")
        for i in range(len(bd) - 1):
            if matmul(bd[i], bd[i + 1]).nnz:
                raise ValueError(f"boundary maps {i} and {i + 1} do not compose to zero")

    def __len__(self):
        return len(self.dims)


def chain_css(code: CssCode) -> ChainComplex:
    """Z-stabilisers -> qubits -> X-stabilisers, Z-stabilisers at the top."""
    return ChainComplex((code.n_x, code.n, code.n_z), (code.h_x, code.h_z.T))


def css_from_chain(cx: ChainComplex, level: int) -> CssCode:
    """Code whose X-stabilisers sit in degree ``level``."""
    if level < 0 or level + 1 >= len(cx.boundaries):
        raise ValueError(f"level {level} needs three consecutive spaces")
    return CssCode(cx.boundaries[level], cx.boundaries[level + 1].T)


EXACT, BOUND, SKIPPED = "exact", "bound", "skipped"


@dataclass
class CodeParams:
    n: int
    n_x: int
    n_z: int
    k: int
    w_x: int
    w_z: int
    q_x: int
    q_z: int
    d_x: int | None = None
    d_z: int | None = None
    rho_x: Fraction | None = None
    rho_z: Fraction | None = None
    method: dict = field(default_factory=dict)

    @property
    def locality(self) -> int:
        return max(self.w_x, self.w_z, self.q_x, self.q_z)

    def as_dict(self) -> dict[str, Any]:
        out = {}
        for key in ("n", "n_x", "n_z", "k", "w_x", "w_z", "q_x", "q_z", "d_x", "d_z", "rho_x", "rho_z"):
            v = getattr(self, key)
            out[key] = str(v) if isinstance(v, Fraction) else v
        out["method"] = dict(sorted(self.method.items()))
        return out

    def swapped(self) -> "CodeParams":
        m = {}
        for key, v in self.method.items():
            m[key.replace("_x", "_t").replace("_z", "_x").replace("_t", "_z")] = v
        return replace(self, n_x=self.n_z, n_z=self.n_x, w_x=self.w_z, w_z=self.w_x,
                       q_x=self.q_z, q_z=self.q_x, d_x=self.d_z, d_z=self.d_x,
                       rho_x=self.rho_z, rho_z=self.rho_x, method=m)


@dataclass(frozen=True)
class MeasureOptions:
    distance: bool = True
    soundness: bool = False
    budget: int = 28


def measure(code: CssCode, opts: MeasureOptions | None = None) -> CodeParams:
    """Sizes, weights and k always; distances and soundness when asked and affordable."""
    from csskit import oracle

    opts = opts or MeasureOptions()
    p = CodeParams(
        n=code.n, n_x=code.n_x, n_z=code.n_z, k=code.k,
        w_x=code.h_x.max_row_weight(), w_z=code.h_z.max_row_weight(),
        q_x=code.h_x.max_col_weight(), q_z=code.h_z.max_col_weight(),
    )
    for key in ("n", "n_x", "n_z", "k", "w_x", "w_z", "q_x", "q_z"):
        p.method[key] = EXACT
    if opts.distance:
        if p.k == 0:
            p.method["d_x"] = p.method["d_z"] = "no logicals"
        else:
            for side in ("x", "z"):
                try:
                    d = oracle.side_distance(code, side, budget=opts.budget)
                    setattr(p, f"d_{side}", d)
                    p.method[f"d_{side}"] = EXACT
                except oracle.BudgetExceeded:
                    p.method[f"d_{side}"] = SKIPPED
    else:
        p.method["d_x"] = p.method["d_z"] = SKIPPED
    if opts.soundness:
        for side, h in (("x", code.h_z), ("z", code.h_x)):
            try:
                w = oracle.brute_soundness(h, budget=opts.budget)
                setattr(p, f"rho_{side}", w.rho)
                p.method[f"rho_{side}"] = EXACT
            except oracle.BudgetExceeded:
                p.method[f"rho_{side}"] = SKIPPED
            except oracle.UndefinedSoundness:
                p.method[f"rho_{side}"] = "undefined"
    else:
        p.method["rho_x"] = p.method["rho_z"] = SKIPPED
    return p
