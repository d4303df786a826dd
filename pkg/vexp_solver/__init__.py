"""Variable-exponent Sobolev numerics and a mountain-pass solver for the p(x)-Laplacian."""

from vexp_solver.energy import EnergyAssembly
from vexp_solver.grid_core import Grid, GridFunction, integrate

__all__ = ["EnergyAssembly", "Grid", "GridFunction", "integrate"]
