"""Spectral sets, pseudospectra, polynomial hulls and multicentric calculus
for operators given by their matrix entries."""

__version__ = "0.1.0"

from .poly import MonicPoly
from .sets import GridSpec, PointSet, RegionEstimate, attouch_wets, hausdorff, theta_grid

__all__ = [
    "__version__",
    "GridSpec",
    "MonicPoly",
    "PointSet",
    "RegionEstimate",
    "attouch_wets",
    "hausdorff",
    "theta_grid",
]
