"""Transformations of CSS codes with exact brute-force parameter oracles."""

from csskit.gf2core import BitMatrix, BitVector, kronecker, matmul, rank, rank_kernel, row_space_equal
from csskit.csscode import ChainComplex, CodeParams, CssCode, chain_css, css_from_chain, dual, measure, validate

__all__ = [
    "BitMatrix",
    "BitVector",
    "ChainComplex",
    "CodeParams",
    "CssCode",
    "chain_css",
    "css_from_chain",
    "dual",
    "kronecker",
    "matmul",
    "measure",
    "rank",
    "rank_kernel",
    "row_space_equal",
    "validate",
]
