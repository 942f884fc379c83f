import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csskit.csscode import (
    ChainComplex,
    CssCode,
    MeasureOptions,
    chain_css,
    css_from_chain,
    dual,
    measure,
    validate,
)
from csskit.gf2core import BitMatrix, kernel_ints, rank
from csskit.zoo import cross_code, random_css, repetition_pcm, toric_code


def test_validate_examples():
    assert validate(toric_code(3)).ok
    bad = validate(CssCode(BitMatrix.identity(1), BitMatrix.identity(1)))
    assert not bad.ok and bad.anticommuting == [(0, 0)]
    assert validate(CssCode(BitMatrix.zeros(0, 3), BitMatrix.zeros(0, 3))).ok


def test_zero_rows_are_flagged():
    c = CssCode(BitMatrix(2, 3, [(0, 1), ()]), BitMatrix.zeros(1, 3))
    rep = validate(c)
    assert rep.ok and rep.zero_x_rows == [1] and rep.zero_z_rows == [0]


def test_measure_toric_3():
    p = measure(toric_code(3))
    assert (p.n, p.k, p.d_x, p.d_z) == (18, 2, 3, 3)
    assert (p.w_x, p.w_z, p.q_x, p.q_z) == (4, 4, 2, 2)
    assert p.method["d_x"] == "exact"


def test_measure_cross_code_weights():
    p = measure(cross_code(repetition_pcm(3)))
    assert p.w_z == 2 and p.q_z == 1


def test_measure_empty_checks():
    p = measure(CssCode(BitMatrix.zeros(0, 5), BitMatrix.zeros(0, 5)), MeasureOptions(distance=False))
    assert p.k == 5


def test_measure_budget_marks_skipped():
    p = measure(toric_code(4), MeasureOptions(budget=2, soundness=True))
    assert p.d_x is None and p.method["d_x"] == "skipped"
    assert p.rho_x is None and p.method["rho_x"] == "skipped"


def test_dual_examples():
    t = toric_code(3)
    assert measure(dual(t)).as_dict() | {"method": None} == measure(t).as_dict() | {"method": None}
    c = cross_code(repetition_pcm(3))
    pc, pd = measure(c, MeasureOptions(distance=False)), measure(dual(c), MeasureOptions(distance=False))
    assert (pd.w_x, pd.w_z) == (pc.w_z, pc.w_x)
    assert dual(dual(c)) == c


def test_chain_round_trip():
    t = toric_code(2)
    assert css_from_chain(chain_css(t), 0) == t


def test_classical_two_term_complex_round_trip():
    h = repetition_pcm(4)
    cx = ChainComplex((3, 4), (h,))
    assert cx.boundaries[0] == h


def test_chain_rejects_nonzero_square():
    with pytest.raises(ValueError):
        ChainComplex((1, 1, 1), (BitMatrix.identity(1), BitMatrix.identity(1)))


def test_chain_rejects_bad_shape():
    with pytest.raises(ValueError):
        ChainComplex((2, 3), (BitMatrix.identity(2),))


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 10), st.integers(0, 4), st.integers(0, 4), st.integers(0, 10_000))
def test_k_two_ways_and_dual_swap(n, nx, nz, seed):
    try:
        c = random_css(n, nx, nz, seed)
    except ValueError:
        return
    assert validate(c).ok
    dim_ker = len(kernel_ints(c.h_x))
    assert c.k == dim_ker - rank(c.h_z)
    p = measure(c, MeasureOptions(soundness=True, budget=12))
    q = measure(dual(c), MeasureOptions(soundness=True, budget=12))
    assert q.as_dict() == p.swapped().as_dict()
