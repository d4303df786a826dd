"""Tests for the grid, nodal quadrature and cell gradients."""

import unittest

import numpy as np
import pytest

from vexp_solver.grid_core import (
    Grid,
    GridFunction,
    cell_average,
    cell_gradient,
    cell_integrate,
    integrate,
)
from vexp_solver.shared_libraries.errors import DomainError, IntegrationError


class TestIntegrate(unittest.TestCase):
    def test_constant_one_gives_measure(self):
        for n in (3, 17, 101):
            grid = Grid(1, n, 0.0, 1.0, dirichlet=False)
            self.assertAlmostEqual(integrate(np.ones(grid.size), grid), 1.0, places=14)

    def test_zero(self):
        grid = Grid(1, 11, 0.0, 1.0)
        self.assertEqual(integrate(GridFunction.zeros(grid)), 0.0)

    def test_affine_is_exact(self):
        grid = Grid(1, 101, 0.0, 1.0, dirichlet=False)
        g = GridFunction.from_function(grid, lambda x: x[:, 0], zero_trace=False)
        self.assertAlmostEqual(integrate(g), 0.5, delta=1e-12)

    def test_non_finite_names_the_node(self):
        grid = Grid(1, 11, 0.0, 1.0)
        values = np.zeros(grid.size)
        values[4] = np.nan
        values[7] = np.inf
        with self.assertRaises(IntegrationError) as ctx:
            integrate(values, grid)
        self.assertEqual(ctx.exception.node, 4)
        self.assertIn("node 4", str(ctx.exception))

    def test_raw_array_needs_grid(self):
        with self.assertRaises(DomainError):
            integrate(np.ones(5))

    def test_weights_partition_the_box(self):
        for grid in (Grid(1, 64, -3.0, 5.0), Grid(2, 33, -1.0, 2.0), Grid.symmetric(2, 20.0, 17)):
            self.assertAlmostEqual(grid.weights.sum() / grid.measure, 1.0, delta=1e-14)

    def test_second_order_refinement(self):
        exact = np.e - 1.0
        errors = []
        for n in (17, 33, 65):
            grid = Grid(1, n, 0.0, 1.0, dirichlet=False)
            errors.append(abs(integrate(np.exp(grid.coordinates[:, 0]), grid) - exact))
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        self.assertTrue(np.all(orders >= 1.8), orders)

    def test_two_dimensional_product(self):
        grid = Grid(2, 41, 0.0, 1.0, dirichlet=False)
        x, y = grid.coordinates.T
        self.assertAlmostEqual(integrate(x * y, grid), 0.25, delta=1e-12)

    def test_cell_integrate_constant(self):
        grid = Grid(2, 9, 0.0, 2.0)
        self.assertAlmostEqual(cell_integrate(grid, np.ones(grid.cell_count)), 4.0, places=13)


class TestCellGradient(unittest.TestCase):
    def test_affine_one_dimensional(self):
        grid = Grid(1, 21, 0.0, 1.0, dirichlet=False)
        u = GridFunction.from_function(grid, lambda x: 3.0 * x[:, 0], zero_trace=False)
        np.testing.assert_allclose(cell_gradient(u), 3.0, atol=1e-12)

    def test_constant_is_flat(self):
        grid = Grid(2, 7, -1.0, 1.0, dirichlet=False)
        u = GridFunction(grid, np.full(grid.size, 4.2))
        np.testing.assert_allclose(cell_gradient(u), 0.0, atol=1e-13)

    def test_affine_two_dimensional(self):
        grid = Grid(2, 11, 0.0, 1.0, dirichlet=False)
        u = GridFunction.from_function(grid, lambda x: x[:, 0] + 2.0 * x[:, 1], zero_trace=False)
        G = cell_gradient(u)
        self.assertEqual(G.shape, (grid.cell_count, 2))
        np.testing.assert_allclose(G[:, 0], 1.0, atol=1e-12)
        np.testing.assert_allclose(G[:, 1], 2.0, atol=1e-12)

    def test_stiffness_matches_cell_sum(self):
        grid = Grid(2, 9, -1.0, 1.0)
        values = np.random.default_rng(3).standard_normal(grid.size)
        u = GridFunction(grid, values)
        direct = grid.cell_volume * np.sum(cell_gradient(u) ** 2)
        self.assertAlmostEqual(values @ (grid.stiffness_matrix @ values), direct, delta=1e-10 * direct)

    def test_cell_average_of_affine_is_center_value(self):
        grid = Grid(2, 5, 0.0, 1.0)
        nodal = grid.coordinates[:, 0] - grid.coordinates[:, 1]
        centers = grid.cell_centers
        np.testing.assert_allclose(cell_average(grid, nodal), centers[:, 0] - centers[:, 1], atol=1e-14)


class TestGrid(unittest.TestCase):
    def test_rejects_bad_shapes(self):
        with self.assertRaises(DomainError):
            Grid(3, 10)
        with self.assertRaises(DomainError):
            Grid(1, 2)
        with self.assertRaises(DomainError):
            Grid(1, 10, 1.0, 1.0)
        with self.assertRaises(DomainError):
            Grid.symmetric(1, -2.0, 11)

    def test_boundary_mask(self):
        grid = Grid(1, 6)
        self.assertEqual(grid.boundary_mask.tolist(), [True, False, False, False, False, True])
        square = Grid(2, 5)
        self.assertEqual(int(square.boundary_mask.sum()), 16)
        self.assertFalse(Grid(1, 6, dirichlet=False).boundary_mask.any())

    def test_with_spacing(self):
        grid = Grid.with_spacing(1, 20.0, 0.05)
        self.assertEqual(grid.nodes_per_axis, 801)
        self.assertAlmostEqual(grid.spacing, 0.05, places=14)

    def test_sine_modes_vanish_on_boundary(self):
        grid = Grid(2, 12)
        modes = grid.sine_modes(5)
        self.assertEqual(modes.shape, (5, grid.size))
        self.assertTrue(np.all(modes[:, grid.boundary_mask] == 0.0))

    def test_node_index(self):
        grid = Grid(1, 11, 0.0, 1.0)
        self.assertEqual(grid.node_index([0.31]), 3)


class TestGridFunction(unittest.TestCase):
    def test_values_are_frozen(self):
        u = GridFunction.zeros(Grid(1, 5))
        with self.assertRaises(ValueError):
            u.values[1] = 2.0

    def test_size_mismatch(self):
        with self.assertRaises(DomainError):
            GridFunction(Grid(1, 5), np.ones(4))

    def test_arithmetic_and_trace(self):
        grid = Grid(1, 5)
        u = GridFunction(grid, [1.0, 2.0, 3.0, 4.0, 5.0])
        self.assertFalse(u.has_zero_trace)
        v = u.with_zero_trace()
        self.assertTrue(v.has_zero_trace)
        np.testing.assert_array_equal((2.0 * v - v).values, v.values)
        np.testing.assert_array_equal((-v).values, [0.0, -2.0, -3.0, -4.0, 0.0])
        self.assertEqual(v.interior_min(), 2.0)
        self.assertTrue(v.is_finite)
        self.assertFalse(GridFunction(grid, [0.0, np.nan, 0.0, 0.0, 0.0]).is_finite)

    def test_mixing_grids_fails(self):
        u = GridFunction.zeros(Grid(1, 5))
        v = GridFunction.zeros(Grid(1, 5, 0.0, 2.0))
        with pytest.raises(DomainError):
            u + v
