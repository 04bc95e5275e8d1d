"""Finite element DOF transformations, orientations and DOF maps."""

__version__ = "0.1.0"
