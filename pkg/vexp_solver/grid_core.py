"""Truncated-domain discretization shared by every other module.

A Grid is an axis-aligned box [lower, upper]^N (N = 1 or 2) with n uniform
nodes per axis. Values live on nodes, gradients live on cells:

    nodal quadrature    sum_i w_i g_i        (tensor trapezoid)
    cell quadrature     h^N sum_c G_c        (one point per cell)

The Dirichlet truncation of R^N is expressed through the boundary mask; a
grid function that represents a member of the discrete X vanishes there.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse

from vexp_solver.shared_libraries.errors import DomainError, IntegrationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid:
    """Uniform node grid on the box [lower, upper]^dimension."""

    dimension: int
    nodes_per_axis: int
    lower: float = -1.0
    upper: float = 1.0
    dirichlet: bool = True

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise DomainError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.nodes_per_axis < 3:
            raise DomainError(f"need at least 3 nodes per axis, got {self.nodes_per_axis}")
        if not self.upper > self.lower:
            raise DomainError(f"empty box [{self.lower}, {self.upper}]")

    @classmethod
    def symmetric(
        cls, dimension: int, half_width: float, nodes_per_axis: int, dirichlet: bool = True
    ) -> Grid:
        """The box [-R, R]^N."""
        if half_width <= 0:
            raise DomainError(f"half width must be positive, got {half_width}")
        return cls(dimension, nodes_per_axis, -half_width, half_width, dirichlet)

    @classmethod
    def with_spacing(cls, dimension: int, half_width: float, spacing: float) -> Grid:
        """The box [-R, R]^N with the node count chosen to hit the spacing h."""
        nodes = int(round(2.0 * half_width / spacing)) + 1
        return cls.symmetric(dimension, half_width, nodes)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.upper - self.lower)

    @property
    def spacing(self) -> float:
        return (self.upper - self.lower) / (self.nodes_per_axis - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nodes_per_axis,) * self.dimension

    @property
    def size(self) -> int:
        return self.nodes_per_axis**self.dimension

    @property
    def measure(self) -> float:
        return (self.upper - self.lower) ** self.dimension

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    @cached_property
    def axis(self) -> NDArray[np.float64]:
        return np.linspace(self.lower, self.upper, self.nodes_per_axis)

    @cached_property
    def coordinates(self) -> NDArray[np.float64]:
        """Node coordinates, shape (size, N), first axis varying slowest."""
        mesh = np.meshgrid(*([self.axis] * self.dimension), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @cached_property
    def radius(self) -> NDArray[np.float64]:
        return np.linalg.norm(self.coordinates, axis=1)

    @cached_property
    def weights(self) -> NDArray[np.float64]:
        """Tensor-trapezoid weights; they sum to the box measure."""
        w1 = np.full(self.nodes_per_axis, self.spacing)
        w1[0] = w1[-1] = 0.5 * self.spacing
        w = w1
        for _ in range(self.dimension - 1):
            w = np.multiply.outer(w, w1)
        return w.ravel()

    @cached_property
    def boundary_mask(self) -> NDArray[np.bool_]:
        if not self.dirichlet:
            return np.zeros(self.size, dtype=bool)
        index = np.indices(self.shape).reshape(self.dimension, -1)
        return np.any((index == 0) | (index == self.nodes_per_axis - 1), axis=0)

    @cached_property
    def interior_mask(self) -> NDArray[np.bool_]:
        return ~self.boundary_mask

    @cached_property
    def interior_indices(self) -> NDArray[np.intp]:
        return np.flatnonzero(self.interior_mask)

    @cached_property
    def cells(self) -> NDArray[np.intp]:
        """Corner node indices per cell, shape (cells, 2^N).

        Corner order follows itertools.product over per-axis offsets, so the
        last corner is the one farthest from the cell origin.
        """
        n = self.nodes_per_axis
        origins = np.indices((n - 1,) * self.dimension).reshape(self.dimension, -1)
        strides = np.array([n ** (self.dimension - 1 - k) for k in range(self.dimension)])
        corners = []
        for offset in self._corner_offsets:
            corners.append(((origins + np.array(offset)[:, None]) * strides[:, None]).sum(axis=0))
        return np.stack(corners, axis=1)

    @cached_property
    def cell_centers(self) -> NDArray[np.float64]:
        return self.coordinates[self.cells].mean(axis=1)

    @property
    def cell_count(self) -> int:
        return (self.nodes_per_axis - 1) ** self.dimension

    @property
    def _corner_offsets(self) -> list[tuple[int, ...]]:
        return list(itertools.product((0, 1), repeat=self.dimension))

    @cached_property
    def difference_operators(self) -> tuple[sparse.csr_matrix, ...]:
        """Per-axis cell gradient operators, each of shape (cells, size).

        Component k of the gradient on a cell is the difference of the
        corner averages on the two faces normal to axis k, divided by h.
        """
        scale = 1.0 / (2 ** (self.dimension - 1) * self.spacing)
        rows = np.repeat(np.arange(self.cell_count), 2**self.dimension)
        cols = self.cells.ravel()
        operators = []
        for k in range(self.dimension):
            coef = np.array([2 * offset[k] - 1 for offset in self._corner_offsets], dtype=float)
            data = np.tile(coef * scale, self.cell_count)
            operators.append(
                sparse.csr_matrix((data, (rows, cols)), shape=(self.cell_count, self.size))
            )
        return tuple(operators)

    @cached_property
    def stiffness_matrix(self) -> sparse.csr_matrix:
        """Constant-exponent stiffness: u^T K u = h^N sum_c |grad u|_c^2."""
        K = sum(D.T @ D for D in self.difference_operators)
        return (self.cell_volume * K).tocsr()

    def node_index(self, point: ArrayLike) -> int:
        """Index of the node nearest to a point."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        return int(np.argmin(np.linalg.norm(self.coordinates - point, axis=1)))

    def sine_modes(self, count: int) -> NDArray[np.float64]:
        """Lowest Dirichlet sine modes of the box, shape (count, size)."""
        width = self.upper - self.lower
        scaled = (self.coordinates - self.lower) / width
        if self.dimension == 1:
            orders = [(k,) for k in range(1, count + 1)]
        else:
            side = int(np.ceil(np.sqrt(count))) + 1
            pairs = itertools.product(range(1, side + 1), repeat=2)
            orders = sorted(pairs, key=lambda kk: (kk[0] ** 2 + kk[1] ** 2, kk))[:count]
        modes = np.ones((len(orders), self.size))
        for row, order in enumerate(orders):
            for axis, k in enumerate(order):
                modes[row] *= np.sin(k * np.pi * scaled[:, axis])
        modes[:, self.boundary_mask] = 0.0
        return modes


@dataclass(frozen=True)
class GridFunction:
    """One real value per node of a grid."""

    grid: Grid
    values: NDArray[np.float64]

    # numpy scalars defer to __rmul__
    __array_ufunc__ = None

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size != self.grid.size:
            raise DomainError(f"expected {self.grid.size} nodal values, got {values.size}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> GridFunction:
        return cls(grid, np.zeros(grid.size))

    @classmethod
    def from_function(
        cls, grid: Grid, func: Callable[[NDArray[np.float64]], ArrayLike], zero_trace: bool = True
    ) -> GridFunction:
        """Sample func(coordinates) on the nodes, optionally zeroing the boundary."""
        values = np.broadcast_to(np.asarray(func(grid.coordinates), dtype=float), (grid.size,)).copy()
        if zero_trace:
            values[grid.boundary_mask] = 0.0
        return cls(grid, values)

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    @property
    def has_zero_trace(self) -> bool:
        return bool(np.all(self.values[self.grid.boundary_mask] == 0.0))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    def with_zero_trace(self) -> GridFunction:
        values = self.values.copy()
        values[self.grid.boundary_mask] = 0.0
        return GridFunction(self.grid, values)

    def interior_min(self) -> float:
        return float(self.values[self.grid.interior_mask].min())

    def _lift(self, other: GridFunction | float) -> NDArray[np.float64] | float:
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise DomainError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other: GridFunction | float) -> GridFunction:
        return GridFunction(self.grid, self.values + self._lift(other))

    def __sub__(self, other: GridFunction | float) -> GridFunction:
        return GridFunction(self.grid, self.values - self._lift(other))

    def __mul__(self, scale: float) -> GridFunction:
        return GridFunction(self.grid, self.values * scale)

    __rmul__ = __mul__

    def __truediv__(self, scale: float) -> GridFunction:
        return GridFunction(self.grid, self.values / scale)

    def __neg__(self) -> GridFunction:
        return GridFunction(self.grid, -self.values)


def _nodal_values(g: GridFunction | ArrayLike, grid: Grid | None) -> tuple[Grid, NDArray[np.float64]]:
    if isinstance(g, GridFunction):
        return g.grid, g.values
    if grid is None:
        raise DomainError("a raw value array needs its grid")
    return grid, np.broadcast_to(np.asarray(g, dtype=float), (grid.size,))


def integrate(g: GridFunction | ArrayLike, grid: Grid | None = None) -> float:
    """Nodal quadrature sum_i w_i g_i.

    Raises:
        IntegrationError: naming the first node that carries a non-finite value.
    """
    grid, values = _nodal_values(g, grid)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        node = int(bad[0])
        raise IntegrationError(node, float(values[node]))
    return float(np.dot(grid.weights, values))


def cell_integrate(grid: Grid, cell_values: ArrayLike) -> float:
    """One-point cell quadrature h^N sum_c G_c."""
    cell_values = np.asarray(cell_values, dtype=float)
    bad = np.flatnonzero(~np.isfinite(cell_values))
    if bad.size:
        cell = int(bad[0])
        raise IntegrationError(cell, float(cell_values[cell]))
    return float(grid.cell_volume * np.sum(cell_values))


def cell_gradient(u: GridFunction) -> NDArray[np.float64]:
    """Per-cell gradient, shape (cells, N); exact for affine u."""
    return np.stack([D @ u.values for D in u.grid.difference_operators], axis=1)


def cell_average(grid: Grid, nodal: ArrayLike) -> NDArray[np.float64]:
    """Average of a nodal quantity over the corners of each cell."""
    nodal = np.asarray(nodal, dtype=float)
    return nodal[grid.cells].mean(axis=1)
