import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from csskit.gf2core import BitMatrix  # noqa: E402


@st.composite
def bitmatrices(draw, max_rows=6, max_cols=8, min_rows=0, min_cols=1):
    r = draw(st.integers(min_rows, max_rows))
    c = draw(st.integers(min_cols, max_cols))
    bits = draw(st.lists(st.integers(0, 1), min_size=r * c, max_size=r * c))
    return BitMatrix.from_dense(np.array(bits, dtype=np.uint8).reshape(r, c))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
