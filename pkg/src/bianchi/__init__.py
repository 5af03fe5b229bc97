"""Integral cohomology of the Euclidean Bianchi groups."""
from .ring import QuadInt, Mat2, quad_ring, split_type, residue_field, ResidueField, euclid_div, gcd, xgcd
from .exactla import ExactMatrix, AbelianDecomposition, snf, kernel_basis, quotient_decomposition

__version__ = "0.1.0"
