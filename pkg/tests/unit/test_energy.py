"""Tests for the discrete energy, its gradient and the operator L."""

import unittest

import numpy as np
import pytest

from vexp_solver.energy import EnergyAssembly
from vexp_solver.grid_core import Grid, GridFunction
from vexp_solver.problem_def import get_instance, inline_instance
from vexp_solver.shared_libraries.errors import DomainError, EnergyOverflowError
from vexp_solver.shared_libraries.types import InlineInstance


def _inline(**spec):
    return inline_instance(InlineInstance.model_validate(spec), name="inline")


def _quadratic_free():
    """p = 2, V = 1, f = 0."""
    return _inline(p={"kind": "constant", "value": 2.0}, f={"kind": "zero"})


def _random_interior(grid, rng, scale=1.0):
    values = scale * rng.uniform(-1.0, 1.0, grid.size)
    values[grid.boundary_mask] = 0.0
    return GridFunction(grid, values)


def _bump(grid):
    return GridFunction.from_function(grid, lambda x: np.cos(0.5 * np.pi * x[:, 0] / grid.half_width))


def _finite_difference_gradient(assembly, u, step=1e-6):
    grid = assembly.grid
    fd = np.zeros(grid.size)
    for i in grid.interior_indices:
        shift = np.zeros(grid.size)
        shift[i] = step
        forward = assembly.energy(GridFunction(grid, u.values + shift))
        backward = assembly.energy(GridFunction(grid, u.values - shift))
        fd[i] = (forward - backward) / (2 * step)
    return fd


GRADIENT_INSTANCES = {
    "cubic": lambda: get_instance("cubic-constant-exponent"),
    "paper-example": lambda: get_instance("paper-example"),
    "pure-power": lambda: get_instance("pure-power"),
    "sub-quadratic-power-log": lambda: _inline(
        p={"kind": "linear", "value": 1.7, "slope": 0.1}, V={"base": 1.0, "curvature": 0.5},
        f={"kind": "power-log"},
    ),
    "linear-exponent-quartic": lambda: _inline(
        p={"kind": "linear", "value": 2.2, "slope": -0.05}, V={"base": 2.0, "curvature": 1.0},
        f={"kind": "power", "exponent": 4.0, "scale": 0.5},
    ),
}


@pytest.mark.parametrize("name", sorted(GRADIENT_INSTANCES))
def test_gradient_matches_finite_differences(name):
    grid = Grid.symmetric(1, 3.0, 32)
    assembly = EnergyAssembly(GRADIENT_INSTANCES[name](), grid)
    u = _random_interior(grid, np.random.default_rng(sorted(GRADIENT_INSTANCES).index(name)), scale=0.8)
    analytic = assembly.gradient(u).values
    fd = _finite_difference_gradient(assembly, u)
    assert np.abs(fd - analytic).max() / np.abs(analytic).max() < 1e-6
    assert np.all(analytic[grid.boundary_mask] == 0.0)


class TestEnergy(unittest.TestCase):
    def test_zero_function(self):
        grid = Grid.symmetric(1, 5.0, 41)
        for name in ("paper-example", "cubic-constant-exponent", "pure-power"):
            assembly = EnergyAssembly(get_instance(name), grid)
            self.assertEqual(assembly.energy(GridFunction.zeros(grid)), 0.0)
            self.assertTrue(assembly.gradient(GridFunction.zeros(grid)).is_zero)

    def test_quadratic_on_unit_interval(self):
        grid = Grid(1, 101, 0.0, 1.0, dirichlet=False)
        assembly = EnergyAssembly(_quadratic_free(), grid)
        u = GridFunction.from_function(grid, lambda x: x[:, 0], zero_trace=False)
        self.assertAlmostEqual(assembly.energy(u), 2.0 / 3.0, delta=1e-3)

    def test_quadratic_quartic_scaling(self):
        grid = Grid.symmetric(1, 4.0, 81)
        assembly = EnergyAssembly(get_instance("cubic-constant-exponent"), grid)
        u = _bump(grid)
        phi1, phi2, phi3 = (assembly.energy(t * u) for t in (1.0, 2.0, 3.0))
        a = (16.0 * phi1 - phi2) / 12.0
        b = (4.0 * phi1 - phi2) / 12.0
        self.assertGreater(a, 0.0)
        self.assertGreater(b, 0.0)
        self.assertAlmostEqual(phi3, 9.0 * a - 81.0 * b, delta=1e-8 * max(1.0, abs(phi3)))

    def test_boundary_trace_required(self):
        grid = Grid(1, 11)
        assembly = EnergyAssembly(get_instance("cubic-constant-exponent"), grid)
        with self.assertRaises(DomainError):
            assembly.energy(GridFunction(grid, np.ones(grid.size)))

    def test_overflow(self):
        grid = Grid.symmetric(1, 2.0, 21)
        assembly = EnergyAssembly(get_instance("cubic-constant-exponent"), grid)
        with self.assertRaises(EnergyOverflowError):
            assembly.energy(1e200 * _bump(grid))

    def test_unknown_variant(self):
        with self.assertRaises(DomainError):
            EnergyAssembly(get_instance("cubic-constant-exponent"), Grid(1, 11), "sideways")

    def test_evaluation_counter(self):
        grid = Grid(1, 11)
        assembly = EnergyAssembly(get_instance("cubic-constant-exponent"), grid)
        assembly.energy(_bump(grid))
        assembly.gradient(_bump(grid))
        self.assertEqual((assembly.counter.energy, assembly.counter.gradient), (1, 1))

    def test_evenness_for_odd_nonlinearities(self):
        grid = Grid.symmetric(1, 3.0, 61)
        u = _random_interior(grid, np.random.default_rng(1))
        for name in ("paper-example", "cubic-constant-exponent"):
            assembly = EnergyAssembly(get_instance(name), grid)
            self.assertLessEqual(assembly.evenness_defect(u), 1e-12)


class TestSechStencil(unittest.TestCase):
    def test_constant_exponent_reduces_to_three_point_stencil(self):
        grid = Grid.with_spacing(1, 10.0, 0.05)
        h = grid.spacing
        assembly = EnergyAssembly(get_instance("cubic-constant-exponent"), grid)
        u = GridFunction.from_function(grid, lambda x: np.sqrt(2.0) / np.cosh(x[:, 0]))
        values = u.values
        stencil = np.zeros(grid.size)
        inner = slice(1, -1)
        laplacian = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / h**2
        stencil[inner] = -laplacian + values[inner] - values[inner] ** 3
        np.testing.assert_allclose(assembly.gradient(u).values / h, stencil, atol=1e-9)
        # away from the truncation boundary the discrete sech profile leaves an O(h^2) residual
        core = np.abs(grid.coordinates[:, 0]) < 9.0
        self.assertLess(np.abs(stencil[core]).max(), 1e-2)


class TestTruncatedVariants(unittest.TestCase):
    def setUp(self):
        self.grid = Grid.symmetric(1, 3.0, 61)
        self.full = EnergyAssembly(get_instance("cubic-constant-exponent"), self.grid)
        self.plus = self.full.with_variant("plus")
        self.minus = self.full.with_variant("minus")
        self.u = _random_interior(self.grid, np.random.default_rng(2), scale=2.0)

    def test_nonpositive_function(self):
        u = GridFunction(self.grid, -np.abs(self.u.values))
        self.assertEqual(self.plus.energy(u), self.plus.principal_energy(u))

    def test_nonnegative_function(self):
        u = GridFunction(self.grid, np.abs(self.u.values))
        self.assertEqual(self.plus.energy(u), self.full.energy(u))
        self.assertEqual(self.minus.energy(-u), self.full.energy(-u))

    def test_mixed_sign_masks_the_primitive(self):
        positive = self.u.values > 0.0
        F = get_instance("cubic-constant-exponent").F(self.grid.coordinates[positive], self.u.values[positive])
        expected = self.plus.principal_energy(self.u) - np.dot(self.grid.weights[positive], F)
        self.assertAlmostEqual(self.plus.energy(self.u), expected, delta=1e-12)

    def test_minus_mirrors_plus(self):
        self.assertEqual(self.minus.energy(-self.u), self.plus.energy(self.u))
        np.testing.assert_array_equal(self.minus.gradient(-self.u).values, -self.plus.gradient(self.u).values)

    def test_plus_gradient_ignores_negative_nodes(self):
        g = self.plus.gradient(self.u).values
        L = self.plus.operator(self.u)
        negative = self.u.values < 0.0
        np.testing.assert_array_equal(g[negative], L[negative])


class TestPairing(unittest.TestCase):
    def setUp(self):
        self.grid = Grid.symmetric(1, 3.0, 61)
        self.assembly = EnergyAssembly(get_instance("pure-power"), self.grid)
        rng = np.random.default_rng(3)
        self.u = _random_interior(self.grid, rng)
        self.v = _random_interior(self.grid, rng)

    def test_zero_direction(self):
        self.assertEqual(self.assembly.pairing(self.u, GridFunction.zeros(self.grid)), 0.0)

    def test_symmetry(self):
        self.assertEqual(self.assembly.pairing(self.u, self.v), self.assembly.pairing(self.v, self.u))

    def test_directional_derivative_along_u(self):
        step = 1e-5
        derivative = (self.assembly.energy((1 + step) * self.u) - self.assembly.energy((1 - step) * self.u)) / (2 * step)
        pairing = self.assembly.directional_derivative(self.u, self.u)
        self.assertAlmostEqual(pairing, derivative, delta=1e-8 * max(1.0, abs(derivative)))

    def test_riesz_inverts_the_gram_matrix(self):
        g = self.assembly.gradient(self.u)
        r = self.assembly.riesz(g)
        interior = self.grid.interior_indices
        np.testing.assert_allclose(self.assembly.gram_matrix @ r.values[interior], g.values[interior], atol=1e-12)
        self.assertTrue(r.has_zero_trace)


class TestMonotonicity(unittest.TestCase):
    def test_identical_arguments(self):
        grid = Grid.symmetric(1, 3.0, 41)
        assembly = EnergyAssembly(get_instance("paper-example"), grid)
        u = _random_interior(grid, np.random.default_rng(4))
        self.assertEqual(assembly.monotonicity_check(u, u), 0.0)

    def test_random_pairs_are_strictly_monotone(self):
        grid = Grid.symmetric(1, 3.0, 41)
        assembly = EnergyAssembly(get_instance("paper-example"), grid)
        rng = np.random.default_rng(5)
        values = []
        for _ in range(100):
            u = _random_interior(grid, rng, scale=10.0 ** rng.uniform(-2, 1))
            v = _random_interior(grid, rng, scale=10.0 ** rng.uniform(-2, 1))
            values.append(assembly.monotonicity_check(u, v))
        self.assertTrue(all(value > 0.0 for value in values))

    def test_constant_exponent_is_the_gram_form(self):
        grid = Grid.symmetric(1, 3.0, 41)
        assembly = EnergyAssembly(_quadratic_free(), grid)
        rng = np.random.default_rng(6)
        u = _random_interior(grid, rng)
        v = _random_interior(grid, rng)
        d = (u - v).values[grid.interior_indices]
        expected = d @ (assembly.gram_matrix @ d)
        self.assertAlmostEqual(assembly.monotonicity_check(u, v), expected, delta=1e-10 * expected)
