import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csskit.csscode import CssCode, measure
from csskit.gf2core import BitMatrix, row_space_equal
from csskit.soundamp import (
    BipartiteGraph,
    ExpanderUnavailable,
    SaRoundConfig,
    _floor_scaled,
    amplification_round,
    amplify_to_constant,
    expander_params,
    growth_bound,
    sample_lossless_expander,
    side_soundness,
    unique_neighbours,
    verify_lossless,
)
from csskit.zoo import cyclic_pcm, toric_code


def ring(t: int) -> CssCode:
    return CssCode(cyclic_pcm(t), BitMatrix.zeros(0, t))


def test_expander_degree_values():
    assert expander_params(6, 6, 0.5)[0] == 12
    assert expander_params(16, 4, 0.5)[0] == 16
    assert expander_params(6, 6, 1 - 1e-9)[0] == 6


def test_expander_kmax_small_and_large():
    # at these sizes the lossless guarantee is vacuous; it only appears around m ~ 250
    assert expander_params(12, 6, 0.5)[1] == 0
    assert expander_params(512, 512, 0.5) == (12, 2)


def test_expander_params_reject_bad_input():
    with pytest.raises(ValueError):
        expander_params(4, 8, 0.5)
    with pytest.raises(ValueError):
        expander_params(4, 4, 1.0)


def test_single_right_vertex():
    g = sample_lossless_expander(5, 1, 0.5)
    assert set(r for _, r in g.edges) == {0}
    assert g.right_degrees() == [5 * g.degree]


def test_sampling_is_deterministic():
    a = sample_lossless_expander(12, 6, 0.5, seed=3)
    b = sample_lossless_expander(12, 6, 0.5, seed=3)
    assert a == b and a != sample_lossless_expander(12, 6, 0.5, seed=4)


@pytest.mark.parametrize("n,m", [(12, 6), (16, 4), (10, 3), (7, 7)])
def test_right_degree_split(n, m):
    g = sample_lossless_expander(n, m, 0.5, seed=1)
    deg = g.right_degrees()
    assert max(deg) == g.right_degree_cap and min(deg) == n * g.degree // m
    assert all(len(g.neighbours(u)) == g.degree for u in range(n))


def test_require_feasible_raises():
    with pytest.raises(ExpanderUnavailable):
        sample_lossless_expander(12, 6, 0.5, require_feasible=True)


def test_singleton_with_distinct_neighbours():
    g = BipartiteGraph(1, 3, 3, ((0, 0), (0, 1), (0, 2)))
    rep = verify_lossless(g, 1, 0.1)
    assert rep.ok and rep.worst_ratio == 3


def test_complete_bipartite_fails():
    g = BipartiteGraph(3, 3, 3, tuple((u, r) for u in range(3) for r in range(3)))
    rep = verify_lossless(g, 2, 0.1)
    assert not rep.ok and len(rep.worst_subset) == 2 and rep.worst_neighbours == 3


def test_verification_of_large_sample():
    g = sample_lossless_expander(512, 512, 0.5, seed=0)
    rep = verify_lossless(g, 2, 0.5)
    assert rep.ok and rep.unique_ok and rep.exhaustive
    assert rep.checked == 512 + math.comb(512, 2)


def test_verification_falls_back_to_sampling():
    g = sample_lossless_expander(40, 20, 0.5, seed=0)
    rep = verify_lossless(g, 3, 0.9, budget=500)
    assert not rep.exhaustive and rep.checked == 500


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.integers(1, 9), st.integers(0, 999), st.data())
def test_unique_neighbours_follow_from_expansion(n, m, seed, data):
    m = min(m, n)
    g = sample_lossless_expander(n, m, 0.5, seed=seed)
    s = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    nb = len({r for u in s for r in g.neighbours(u)})
    assert unique_neighbours(g, s) >= 2 * nb - len(s) * g.degree


def test_floor_scaled_is_exact():
    assert _floor_scaled(16, 3, Fraction(1, 3)) == 8
    assert _floor_scaled(16, 4, Fraction(1, 3)) == 6
    assert _floor_scaled(1, 3, Fraction(1, 3)) == 0
    for n in range(1, 40):
        for i in range(1, 6):
            m = _floor_scaled(n, i, Fraction(1, 3))
            assert m * 2 ** (i / 3) <= n + 1e-9 < (m + 1) * 2 ** (i / 3)


def test_group_range():
    cfg = SaRoundConfig(alpha=Fraction(1, 3))
    assert list(cfg.group_range(Fraction(1, 16))) == [3, 4]
    assert list(cfg.group_range(Fraction(1, 2))) == [1]
    assert list(cfg.group_range(Fraction(3, 5))) == []
    assert list(cfg.group_range(Fraction(2))) == []
    assert cfg.kappa == Fraction(2, 3)
    assert cfg.group_eps(3) == pytest.approx(0.5)


def test_round_with_high_soundness_is_identity():
    t = toric_code(2)
    out = amplification_round(t, "x", SaRoundConfig(rho=Fraction(3, 5)))
    assert out == t and out.meta["soundamp"]["groups"] == []


def test_round_with_supplied_soundness():
    c = ring(12)
    out = amplification_round(c, "x", SaRoundConfig(rho=Fraction(1, 16)), seed=2)
    rep = out.meta["soundamp"]
    assert [g["i"] for g in rep["groups"]] == [3, 4]
    assert row_space_equal(c.h_x, out.h_x) and out.k == c.k
    assert out.n_x == 12 + 6 + 4
    assert out.n_x <= growth_bound(12, range(3, 5), Fraction(1, 3))
    for g in rep["groups"]:
        assert g["max_right_degree"] <= g["right_cap"]
    assert rep["weight_after"] <= max(g["weight_bound"] for g in rep["groups"])
    assert rep["degree_after"] <= rep["degree_bound"]


def test_round_on_z_side_keeps_parameters():
    t = toric_code(3)
    out = amplification_round(t, "z", SaRoundConfig(rho=Fraction(1, 8)), seed=0)
    assert out.h_x == t.h_x and row_space_equal(t.h_z, out.h_z)
    p, q = measure(t), measure(out)
    assert (p.n, p.k, p.d_x, p.d_z) == (q.n, q.k, q.d_x, q.d_z)


def test_round_measures_when_rho_missing():
    out = amplification_round(ring(16), "x", seed=0)
    assert out.meta["soundamp"]["rho_source"] == "measured"
    assert out.meta["soundamp"]["rho"] == "1/4"


def test_bad_side():
    with pytest.raises(ValueError):
        amplification_round(ring(8), "y", SaRoundConfig(rho=Fraction(1, 8)))


def test_amplify_already_at_target():
    c = ring(8)
    rho = side_soundness(c, "x")
    out, rounds = amplify_to_constant(c, "x", rho)
    assert rounds == 0 and out == c


def test_amplify_ring_trajectory():
    c = ring(20)
    out, rounds = amplify_to_constant(c, "x", Fraction(1, 2), seed=1)
    traj = out.meta["soundamp_trajectory"]
    assert rounds == 3 and traj["reached"]
    rhos = [Fraction(r) for r in traj["rho"]]
    assert rhos == sorted(rhos)
    p, q = measure(c), measure(out)
    assert (p.n, p.k, p.d_x, p.d_z) == (q.n, q.k, q.d_x, q.d_z)
