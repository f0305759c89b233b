"""Differential microwave imaging of breast tumors.

A 2D TM method-of-moments scattering model with inhomogeneous Green's
operators, a spline tumor parametrization and a Kriging-assisted particle
swarm inversion loop.
"""

from sbdmwi.em.geometry import Grid, ImagingSetup, PermittivityMap
from sbdmwi.scenario.tumor import SearchSpace, TumorDescriptor


__version__ = "0.1.0"

__all__ = [
    "Grid",
    "ImagingSetup",
    "PermittivityMap",
    "SearchSpace",
    "TumorDescriptor",
]
