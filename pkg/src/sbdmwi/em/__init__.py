"""Electromagnetic core: geometry, Green's matrices and the MoM forward model."""
