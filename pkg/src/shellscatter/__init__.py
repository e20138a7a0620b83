"""Numerical scattering toolkit for the spherical shell potential.

Jost functions and the S-matrix on the complex wave-number plane, resonance
pole location, analytically continued bra/ket functionals on a concrete
Gaussian-falloff test-function space, and group vs. contour-rotated
(retarded/advanced) time evolution, with each identity and bound exposed as
an executable check (see :mod:`shellscatter.verify`).
"""

from .model import CANONICAL, PhysicalConfig, Sheet, SheetPoint

__all__ = ["CANONICAL", "PhysicalConfig", "Sheet", "SheetPoint"]

__version__ = "0.1.0"
