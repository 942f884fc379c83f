import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csskit.csscode import CssCode, measure, validate
from csskit.distamp import (
    PermGraph,
    ael_amplify,
    concatenate_css,
    counting_violations,
    identity_graph,
    logical_basis,
    permute_qubits,
    relative_distance_bound,
    sample_pseudorandom_graph,
    soundness_alpha,
    soundness_bound,
    verify_pseudorandom,
)
from csskit.gf2core import BitMatrix, in_row_space, matvec, rank
from csskit.oracle import brute_soundness
from csskit.zoo import random_css, repetition_pcm, surface_code, toric_code

INNER = CssCode(BitMatrix.from_dense([[1, 1, 1, 1]]), BitMatrix.from_dense([[1, 1, 0, 0], [0, 0, 1, 1]]))
TRIVIAL4 = CssCode(BitMatrix.zeros(0, 4), BitMatrix.zeros(0, 4))
SIX = CssCode(BitMatrix.from_dense([[1] * 6]), BitMatrix.from_dense([[1] * 6]))


def check_basis(code, basis):
    assert basis.k == code.k
    assert basis.pairing() == [[int(i == j) for j in range(basis.k)] for i in range(basis.k)]
    for x in basis.x:
        assert matvec(code.h_z, x) == 0 and not in_row_space(code.h_x, x)
    for z in basis.z:
        assert matvec(code.h_x, z) == 0 and not in_row_space(code.h_z, z)


def test_toric_basis():
    t = toric_code(2)
    b = logical_basis(t)
    check_basis(t, b)
    assert b == logical_basis(t)


def test_single_pair_basis():
    c = CssCode(BitMatrix.zeros(0, 3), repetition_pcm(3))
    b = logical_basis(c)
    assert b.k == 1
    check_basis(c, b)


def test_trivial_basis_is_unit():
    b = logical_basis(TRIVIAL4)
    assert b.x == b.z == (1, 2, 4, 8)


def test_basis_requires_logicals():
    with pytest.raises(ValueError):
        logical_basis(CssCode(BitMatrix.from_dense([[1, 1]]), BitMatrix.from_dense([[1, 1]])))


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 9), st.integers(0, 4), st.integers(0, 4), st.integers(0, 9999))
def test_basis_on_random_codes(n, nx, nz, seed):
    try:
        c = random_css(n, nx, nz, seed)
    except ValueError:
        return
    if c.k:
        check_basis(c, logical_basis(c))


def test_concatenate_with_trivial_inner_is_identity():
    s = surface_code(3)
    assert concatenate_css(s, CssCode(BitMatrix.zeros(0, 1), BitMatrix.zeros(0, 1)), 13) == s


def test_concatenate_two_qubit_outer_into_toric():
    outer = CssCode(BitMatrix.from_dense([[1, 1]]), BitMatrix.zeros(0, 2))
    t = toric_code(2)
    c = concatenate_css(outer, t, 1)
    assert validate(c).ok and c.k == outer.k == 1 and c.n == 8
    assert c.n_x == outer.n_x + t.n_x and c.n_z == outer.n_z + t.n_z


def test_concatenate_counts_and_distance():
    s = surface_code(3)
    c = concatenate_css(s, INNER, 13)
    p = measure(c)
    assert p.n == 52 and p.k == 1 and validate(c).ok
    assert p.n_x == s.n_x + 13 * INNER.n_x and p.n_z == s.n_z + 13 * INNER.n_z
    assert p.d_x >= 3 * 2 and p.d_z >= 3 * 2


def test_concatenate_rejects_bad_blocks():
    with pytest.raises(ValueError):
        concatenate_css(surface_code(3), toric_code(2), 6)


def test_single_block_graph_is_exact():
    g = sample_pseudorandom_graph(1, 5, 1.0)
    rep = verify_pseudorandom(g)
    assert rep.ok and rep.measured_eps == 0


def test_four_block_graph_passes():
    g = sample_pseudorandom_graph(4, 16, 0.5, seed=0)
    rep = verify_pseudorandom(g)
    assert rep.ok and rep.measured_eps <= 0.5


def test_permutation_is_bijection():
    g = sample_pseudorandom_graph(5, 16, 0.5, seed=2)
    assert sorted(g.permutation()) == list(range(5 * 16))
    assert (g.adjacency().sum(axis=0) == 16).all() and (g.adjacency().sum(axis=1) == 16).all()


def test_sampling_needs_enough_degree():
    with pytest.raises(ValueError):
        sample_pseudorandom_graph(4, 8, 0.5)


def test_verify_rejects_bad_graph():
    # every edge between block 0 and block 0: far from pseudorandom
    g = PermGraph(2, 4, tuple([(0, j) for j in range(4)] + [(1, j) for j in range(4)]), 0.1)
    rep = verify_pseudorandom(g)
    assert not rep.ok and rep.measured_eps == pytest.approx(0.5)


@pytest.mark.parametrize("b", [2, 3, 4, 5, 6])
def test_counting_property(b):
    g = sample_pseudorandom_graph(b, 16, 0.5, seed=b)
    eps = verify_pseudorandom(g).measured_eps
    for a_in in (0.25, 0.5, 0.75, 0.9):
        for a_out in (0.1, 0.25, 0.5, 0.9):
            assert counting_violations(g, a_in, a_out, eps) == []


def test_distance_formula_value():
    assert relative_distance_bound(0.25, 0.25, 0.5, 0.1) == pytest.approx(0.25 * (0.125 - 0.1 * math.sqrt(0.5)))
    assert relative_distance_bound(0.25, 0.25, 0.5, 0.1) == pytest.approx(0.013572, abs=1e-6)


def test_ael_with_trivial_codes_relabels_outer():
    s = surface_code(3)
    one = CssCode(BitMatrix.zeros(0, 1), BitMatrix.zeros(0, 1))
    out = ael_amplify(s, one, one, identity_graph(13, 1))
    assert out == s


def test_ael_rejects_mismatched_block():
    with pytest.raises(ValueError):
        ael_amplify(surface_code(3), INNER, toric_code(2), identity_graph(13, 4))


@pytest.mark.parametrize("block", [TRIVIAL4, SIX], ids=["trivial4", "six"])
def test_ael_end_to_end(block):
    s = surface_code(3)
    g = sample_pseudorandom_graph(13, 4, 1.0, seed=0, check=False)
    eps = verify_pseudorandom(g).measured_eps
    out = ael_amplify(s, INNER, block, g)
    assert validate(out).ok and out.k == s.k
    assert out.n == 13 * block.n
    p = measure(out)
    ps, pi, pb = measure(s), measure(INNER), measure(block)
    bound = relative_distance_bound(min(pb.d_x, pb.d_z) / block.n, min(pi.d_x, pi.d_z) / 4, 3 / 13, eps)
    assert p.d_z / out.n >= bound
    assert p.d_z >= 6
    w = max(p.w_x, p.w_z, p.q_x, p.q_z)
    assert w <= ps.locality * 4 * block.n


def test_ael_soundness_bound():
    s = surface_code(3)
    g = sample_pseudorandom_graph(13, 4, 1.0, seed=0, check=False)
    out = ael_amplify(s, INNER, TRIVIAL4, g)
    rho_out = brute_soundness(s.h_x).rho
    rho_hat = Fraction(s.n_x) * rho_out / s.n
    alpha = soundness_alpha(rho_hat, 4, 1, measure(s).locality)
    assert alpha == Fraction(1, 43)
    measured = brute_soundness(out.h_x).rho
    assert measured >= soundness_bound(out.n, out.n_x, alpha, 4, 4)


def test_permute_then_inverse():
    s = surface_code(3)
    perm = list(range(1, 13)) + [0]
    inv = [perm.index(i) for i in range(13)]
    assert permute_qubits(permute_qubits(s, perm), inv) == s
    assert rank(permute_qubits(s, perm).h_x) == rank(s.h_x)
