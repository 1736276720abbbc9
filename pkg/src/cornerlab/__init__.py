"""Numerical laboratory for pseudo-corner domains and the Dirichlet Laplacian."""
from .errors import CornerLabError
from .geometry import DomainFamily, PatternSpec, SectorSpec, build_family, fig2_family, instantiate

__version__ = "0.1.0"

__all__ = ["CornerLabError", "DomainFamily", "PatternSpec", "SectorSpec", "build_family",
           "fig2_family", "instantiate", "__version__"]
