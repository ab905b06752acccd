"""Precision matrices of spatial random effects and their factorization."""

from .base import AbstractPrecisionFamily, PrecisionFamilyParam, SparsePrecision
from .cholesky import SparseCholesky
from .families import (
    IcarFamily,
    LerouxFamily,
    ProperCarFamily,
    icar_precision,
    leroux_precision,
    make_family,
    proper_car_precision,
)
from .moran import MoranBasis, default_moran_rank, moran_basis
