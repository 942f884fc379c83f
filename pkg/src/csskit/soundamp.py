"""Soundness amplification by appending expander-summed stabilisers.

One round keeps every old check of one side and appends, for each group
index ``i``, one new check per right vertex of a lossless expander whose left
vertices are the old checks.  The new checks are sums of old ones, so the
stabiliser group (and with it n, k and both distances) never changes.

``side="x"`` amplifies the rows of ``h_x``; in the quantum parameters that is
``rho_z``, the soundness of the classical code ``h_x``.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations

from csskit.csscode import CssCode
from csskit.gf2core import BitMatrix, popcount, row_space_equal
from csskit.oracle import DEFAULT_BUDGET, brute_soundness


@dataclass(frozen=True)
class BipartiteGraph:
    """D-left-regular bipartite multigraph; ``edges`` lists (left, right) half-edge pairs."""

    left: int
    right: int
    degree: int
    edges: tuple[tuple[int, int], ...]
    seed: int | None = None

    def neighbours(self, u: int) -> list[int]:
        return [r for l, r in self.edges[u * self.degree:(u + 1) * self.degree]]

    def right_degrees(self) -> list[int]:
        deg = [0] * self.right
        for _, r in self.edges:
            deg[r] += 1
        return deg

    @property
    def right_degree_cap(self) -> int:
        return -(-self.left * self.degree // max(self.right, 1))

    def neighbour_masks(self) -> list[int]:
        masks = []
        for u in range(self.left):
            m = 0
            for r in self.neighbours(u):
                m |= 1 << r
            masks.append(m)
        return masks


def expander_params(n_left: int, m_right: int, eps: float) -> tuple[int, int]:
    """(D, K_max) with base-2 logarithms; K_max == 0 means no lossless guarantee exists."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if not 1 <= m_right <= n_left:
        raise ValueError(f"need 1 <= m_right <= n_left, got m={m_right}, n={n_left}")
    D = math.ceil(math.log2(8 * math.e ** 2 * n_left / m_right) / eps)
    x = eps * D / (eps * D - 1)
    k_max = math.floor(eps ** x * m_right / (2 * math.e * D ** x))
    return D, k_max


def _sample(n: int, m: int, D: int, rng: random.Random) -> tuple[tuple[int, int], ...]:
    total = n * D
    base, extra = divmod(total, m)
    slots = [r for r in range(m) for _ in range(base + (r < extra))]
    rng.shuffle(slots)
    return tuple((u, slots[u * D + j]) for u in range(n) for j in range(D))


@dataclass
class LosslessReport:
    ok: bool
    k_max: int
    eps: float
    exhaustive: bool
    checked: int
    worst_subset: tuple[int, ...] | None = None
    worst_neighbours: int | None = None
    unique_ok: bool = True

    @property
    def worst_ratio(self) -> Fraction | None:
        if self.worst_subset is None:
            return None
        return Fraction(self.worst_neighbours, len(self.worst_subset))


def unique_neighbours(g: BipartiteGraph, subset) -> int:
    """Right vertices receiving exactly one edge from ``subset``."""
    hits: dict[int, int] = {}
    for u in subset:
        for r in g.neighbours(u):
            hits[r] = hits.get(r, 0) + 1
    return sum(1 for c in hits.values() if c == 1)


def _subsets(n: int, k_max: int, budget: int, seed: int):
    total = sum(math.comb(n, k) for k in range(1, k_max + 1))
    if total <= budget:
        for k in range(1, k_max + 1):
            yield from combinations(range(n), k)
        return
    rng = random.Random(seed)
    for _ in range(budget):
        k = rng.randint(1, k_max)
        yield tuple(sorted(rng.sample(range(n), k)))


def verify_lossless(g: BipartiteGraph, k_max: int, eps: float, budget: int = 1 << 20, seed: int = 0) -> LosslessReport:
    """Check |N(S)| >= (1-eps)|S|D for every left set with |S| <= k_max.

    Falls back to ``budget`` random subsets when the exhaustive count is
    larger; the report is then flagged non-exhaustive.  The unique-neighbour
    bound (1-2eps)|S|D is checked on every subset that passes.
    """
    k_max = min(k_max, g.left)
    total = sum(math.comb(g.left, k) for k in range(1, k_max + 1))
    rep = LosslessReport(True, k_max, eps, total <= budget, 0)
    masks = g.neighbour_masks()
    worst = None
    for s in _subsets(g.left, k_max, budget, seed):
        m = 0
        for u in s:
            m |= masks[u]
        nb = popcount(m)
        rep.checked += 1
        if worst is None or nb * len(worst[0]) < worst[1] * len(s):
            worst = (s, nb)
        if nb < (1 - eps) * len(s) * g.degree:
            rep.ok = False
        elif unique_neighbours(g, s) < (1 - 2 * eps) * len(s) * g.degree:
            rep.unique_ok = False
    if worst is not None:
        rep.worst_subset, rep.worst_neighbours = worst
    return rep


class ExpanderUnavailable(RuntimeError):
    pass


def sample_lossless_expander(n_left: int, m_right: int, eps: float, seed: int = 0, retries: int = 16,
                             verify_budget: int = 1 << 20, require_feasible: bool = False) -> BipartiteGraph:
    """Half-edge matching with right degrees split between floor and ceil of nD/m.

    Each attempt is verified up to K_max and resampled on failure.  When
    K_max is 0 the guarantee is vacuous and the first sample is returned,
    unless ``require_feasible`` is set.
    """
    D, k_max = expander_params(n_left, m_right, eps)
    if k_max < 1 and require_feasible:
        raise ExpanderUnavailable(f"K_max < 1 for n={n_left}, m={m_right}, eps={eps}")
    for attempt in range(retries):
        s = seed * 7919 + attempt
        g = BipartiteGraph(n_left, m_right, D, _sample(n_left, m_right, D, random.Random(s)), s)
        if k_max < 1 or verify_lossless(g, k_max, eps, verify_budget).ok:
            return g
    raise ExpanderUnavailable(f"no lossless sample in {retries} attempts")


# amplification rounds


def _floor_scaled(n: int, i: int, alpha: Fraction) -> int:
    """Largest M with M * 2^(i*alpha) <= n, in integer arithmetic."""
    p, q = alpha.numerator, alpha.denominator
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid ** q << (i * p) <= n ** q:
            lo = mid
        else:
            hi = mid - 1
    return lo


@dataclass(frozen=True)
class SaRoundConfig:
    alpha: Fraction = Fraction(1, 3)
    rho: Fraction | None = None
    budget: int = DEFAULT_BUDGET
    require_lossless: bool = False
    verify_budget: int = 1 << 18

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def kappa(self) -> Fraction:
        return (1 + self.alpha) / 2

    def group_range(self, rho: Fraction) -> range:
        if rho <= 0:
            raise ValueError("soundness must be positive to amplify")
        if rho >= 1:
            return range(0)
        lg = math.log2(1 / rho)
        lo = math.ceil(float(self.kappa) * lg - 1e-12)
        hi = math.floor(lg + 1e-12)
        return range(max(lo, 1), hi + 1)

    def group_size(self, n_x: int, i: int) -> int:
        return max(1, _floor_scaled(n_x, i, self.alpha))

    def group_eps(self, i: int) -> float:
        a = float(self.alpha)
        return math.sqrt(i * a / 2 ** (i * (1 - a)))


@dataclass
class GroupReport:
    i: int
    m: int
    eps: float
    degree: int | None = None
    k_max: int | None = None
    right_cap: int | None = None
    max_right_degree: int | None = None
    weight_bound: int | None = None
    size_within_bound: bool = True
    lossless: bool | None = None
    skipped: str | None = None


@dataclass
class RoundReport:
    side: str
    rho: str
    rho_source: str
    alpha: str
    n_checks_before: int
    n_checks_after: int = 0
    groups: list[GroupReport] = field(default_factory=list)
    weight_before: int = 0
    weight_after: int = 0
    degree_before: int = 0
    degree_after: int = 0
    degree_bound: int = 0
    row_space_equal: bool = True

    def as_dict(self) -> dict:
        return asdict(self)


def _side_matrix(code: CssCode, side: str) -> BitMatrix:
    if side not in ("x", "z"):
        raise ValueError(f"side must be 'x' or 'z', got {side!r}")
    return code.h_x if side == "x" else code.h_z


def side_soundness(code: CssCode, side: str, budget: int = DEFAULT_BUDGET) -> Fraction:
    return brute_soundness(_side_matrix(code, side), budget).rho


def amplification_round(code: CssCode, side: str, cfg: SaRoundConfig | None = None, seed: int = 0) -> CssCode:
    """Append one expander-summed group of ``side`` checks per group index.

    Groups whose expander parameters are out of range (eps >= 1) are skipped
    and flagged, as are groups with K_max < 1 when ``require_lossless`` is set.
    The round report lands in ``meta["soundamp"]``.
    """
    cfg = cfg or SaRoundConfig()
    h = _side_matrix(code, side)
    if cfg.rho is None:
        rho, source = side_soundness(code, side, cfg.budget), "measured"
    else:
        rho, source = Fraction(cfg.rho), "supplied"
    rep = RoundReport(side, str(rho), source, str(cfg.alpha), h.nrows,
                      weight_before=h.max_row_weight(), degree_before=h.max_col_weight())
    old = h.rows
    new_rows: list[int] = []
    deg_bound = rep.degree_before
    for i in cfg.group_range(rho):
        m, eps = cfg.group_size(h.nrows, i), cfg.group_eps(i)
        gr = GroupReport(i, m, eps)
        rep.groups.append(gr)
        if h.nrows == 0:
            gr.skipped = "no checks"
            continue
        if not 0 < eps < 1:
            gr.skipped = "eps outside (0, 1)"
            continue
        D, k_max = expander_params(h.nrows, m, eps)
        gr.degree, gr.k_max = D, k_max
        if k_max < 1 and cfg.require_lossless:
            gr.skipped = "K_max < 1"
            continue
        g = sample_lossless_expander(h.nrows, m, eps, seed * 1009 + i, verify_budget=cfg.verify_budget)
        gr.right_cap = g.right_degree_cap
        gr.max_right_degree = max(g.right_degrees())
        gr.weight_bound = rep.weight_before * gr.right_cap
        gr.size_within_bound = _floor_scaled(h.nrows, i, cfg.alpha) >= m
        gr.lossless = verify_lossless(g, k_max, eps, cfg.verify_budget).ok if k_max >= 1 else None
        adj: list[set[int]] = [set() for _ in range(m)]
        for u, r in g.edges:
            adj[r].add(u)
        for r in range(m):
            x = 0
            for u in adj[r]:
                x ^= old[u]
            new_rows.append(x)
        deg_bound += rep.degree_before * D
    out_h = BitMatrix.from_rows(list(old) + new_rows, h.ncols)
    rep.row_space_equal = row_space_equal(h, out_h)
    if not rep.row_space_equal:
        raise AssertionError("amplification changed the row space")
    rep.n_checks_after = out_h.nrows
    rep.weight_after = out_h.max_row_weight()
    rep.degree_after = out_h.max_col_weight()
    rep.degree_bound = deg_bound
    h_x, h_z = (out_h, code.h_z) if side == "x" else (code.h_x, out_h)
    meta = dict(code.meta)
    meta["soundamp"] = rep.as_dict()
    return CssCode(h_x, h_z, meta)


def growth_bound(n_x: int, groups: range, alpha: Fraction) -> float:
    """N_X * (1 + sum_i 2^(-i*alpha)) over the realised group range."""
    return n_x * (1 + sum(2 ** (-i * float(alpha)) for i in groups))


def amplify_to_constant(code: CssCode, side: str, target_rho: Fraction, alpha: Fraction = Fraction(1, 3),
                        seed: int = 0, max_rounds: int = 6, budget: int = DEFAULT_BUDGET) -> tuple[CssCode, int]:
    """Repeat rounds until the measured soundness reaches ``target_rho``.

    Stops early when the group range is empty (rho >= 1/2) since further
    rounds are then the identity.  The trajectory and whether the target was
    reached are stored in ``meta["soundamp_trajectory"]``.
    """
    target_rho = Fraction(target_rho)
    w0 = _side_matrix(code, side).max_row_weight()
    rho0 = rho = side_soundness(code, side, budget)
    traj = [str(rho)]
    rounds = 0
    cur = code
    while rho < target_rho and rounds < max_rounds:
        cfg = SaRoundConfig(alpha=alpha, rho=rho, budget=budget)
        if not cfg.group_range(rho):
            break
        cur = amplification_round(cur, side, cfg, seed + rounds)
        rounds += 1
        rho = side_soundness(cur, side, budget)
        traj.append(str(rho))
    w1 = _side_matrix(cur, side).max_row_weight()
    exponent = None
    if rounds and rho0 < 1 and w0 and w1 > w0:
        exponent = math.log(w1 / w0) / math.log(1 / float(rho0))
    meta = dict(cur.meta)
    meta["soundamp_trajectory"] = {
        "rho": traj, "rounds": rounds, "target": str(target_rho),
        "reached": rho >= target_rho, "weight_before": w0, "weight_after": w1,
        "weight_exponent": exponent,
    }
    return CssCode(cur.h_x, cur.h_z, meta), rounds
