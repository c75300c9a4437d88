"""Exact free-field checks for the quantum toroidal gl(m|n) superalgebra."""

from .rootdata import RootDatum, WeightSpec, build_root_datum
from .scalar import Scalar

__all__ = ["RootDatum", "Scalar", "WeightSpec", "build_root_datum"]
