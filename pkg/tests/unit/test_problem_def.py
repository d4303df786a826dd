"""Tests for nonlinearities, primitives, instances and the hypothesis checks."""

import unittest

import numpy as np
import pytest

from vexp_solver.grid_core import Grid
from vexp_solver.problem_def import (
    BUILTIN_INSTANCES,
    ExponentProfile,
    ProblemInstance,
    check_AR,
    check_H0,
    check_H1,
    check_H2,
    check_H3,
    check_V,
    get_instance,
    inline_instance,
)
from vexp_solver.problem_def.instances import (
    bump_exponent,
    bump_exponent_gradient,
    constant_exponent,
    quadratic_potential,
)
from vexp_solver.problem_def.nonlinearities import Exponential, Power, PowerLog, Square, Zero
from vexp_solver.problem_def.quadrature import simpson_primitive
from vexp_solver.shared_libraries.errors import DomainError
from vexp_solver.shared_libraries.types import InlineInstance, Verdict

X_SAMPLES = np.linspace(-6.0, 6.0, 25)[:, None]


def _variant(nonlinearity, potential=None, name="constructed"):
    """The power-log instance with f (and optionally V) swapped out."""
    base = get_instance("paper-example")
    return ProblemInstance(
        name=name,
        exponent=base.exponent,
        potential=potential if potential is not None else base.potential,
        nonlinearity=nonlinearity,
    )


class TestQuadrature(unittest.TestCase):
    def test_polynomial_primitive(self):
        upper = np.array([0.0, 0.5, -2.0, 10.0, 1e3])
        result = simpson_primitive(lambda rows, s: s**3, upper)
        np.testing.assert_allclose(result, upper**4 / 4.0, rtol=1e-10, atol=1e-12)

    def test_singular_power_at_origin(self):
        upper = np.array([0.3, 2.0, 50.0])
        result = simpson_primitive(lambda rows, s: np.abs(s) ** 0.5, upper)
        np.testing.assert_allclose(result, upper**1.5 / 1.5, rtol=1e-9)

    def test_row_dependent_integrand(self):
        scale = np.array([1.0, 2.0, 3.0])
        upper = np.array([1.0, 1.0, 1.0])
        result = simpson_primitive(lambda rows, s: scale[rows][:, None] * s, upper)
        np.testing.assert_allclose(result, 0.5 * scale, rtol=1e-12)


class TestNonlinearities(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(0)
        self.x = rng.uniform(-3.0, 3.0, (100, 1))
        self.t = rng.uniform(-4.0, 4.0, 100)

    def _check_primitive(self, nonlinearity, tolerance):
        step = 1e-5
        derivative = (nonlinearity.F(self.x, self.t + step) - nonlinearity.F(self.x, self.t - step)) / (2 * step)
        f = nonlinearity.f(self.x, self.t)
        np.testing.assert_allclose(derivative, f, rtol=tolerance, atol=tolerance)

    def test_closed_form_primitives(self):
        for name in ("pure-power", "cubic-constant-exponent"):
            instance = get_instance(name)
            self.assertTrue(instance.closed_form)
            self._check_primitive(instance.nonlinearity, 1e-6)

    def test_quadrature_primitive(self):
        instance = get_instance("paper-example")
        self.assertFalse(instance.closed_form)
        self._check_primitive(instance.nonlinearity, 1e-6)

    def test_primitive_vanishes_at_zero(self):
        for factory in BUILTIN_INSTANCES.values():
            instance = factory()
            zeros = np.zeros(self.x.shape[0])
            np.testing.assert_array_equal(instance.F(self.x, zeros), 0.0)
            np.testing.assert_array_equal(instance.f(self.x, zeros), 0.0)

    def test_power_log_is_odd(self):
        f = get_instance("paper-example").nonlinearity
        np.testing.assert_array_equal(f.f(self.x, -self.t), -f.f(self.x, self.t))
        np.testing.assert_array_equal(f.F(self.x, -self.t), f.F(self.x, self.t))

    def test_two_dimensional_t(self):
        f = Power(4.0)
        bound = f.bind(self.x[:3])
        t = np.array([[1.0, 2.0], [0.5, -1.0], [3.0, 0.0]])
        np.testing.assert_allclose(bound.primitive(t), t**4 / 4.0)
        log = PowerLog(2.5, 3.5).bind(self.x[:3])
        np.testing.assert_allclose(log.primitive(t)[:, 0], log.primitive(t[:, 0]), rtol=1e-12)

    def test_simple_families(self):
        t = np.array([-1.0, 0.0, 2.0])
        x = np.zeros((3, 1))
        np.testing.assert_allclose(Exponential().F(x, t), np.expm1(t) - t)
        np.testing.assert_allclose(Square().f(x, t), t**2)
        np.testing.assert_array_equal(Zero().F(x, t), 0.0)


class TestInstances(unittest.TestCase):
    def test_builtin_lookup(self):
        self.assertEqual(
            sorted(BUILTIN_INSTANCES), ["cubic-constant-exponent", "paper-example", "pure-power"]
        )
        with self.assertRaises(DomainError):
            get_instance("no-such-instance")

    def test_power_log_example_exponents(self):
        instance = get_instance("paper-example")
        x = np.array([[0.0], [1.0], [-2.0]])
        np.testing.assert_allclose(instance.p(x), bump_exponent(x))
        np.testing.assert_allclose(instance.a(x), instance.p(x) + 1.0)
        np.testing.assert_allclose(instance.alpha(x), instance.p(x) + 0.5)
        np.testing.assert_allclose(instance.V(x), [1.0, 2.0, 5.0])
        self.assertTrue(np.all(bump_exponent(np.linspace(-50, 50, 1001)[:, None]) > 1.9))

    def test_bump_gradient_matches_differences(self):
        x = np.array([[0.3, -0.7], [1.2, 0.4]])
        step = 1e-6
        for axis in range(2):
            shift = np.zeros(2)
            shift[axis] = step
            fd = (bump_exponent(x + shift) - bump_exponent(x - shift)) / (2 * step)
            np.testing.assert_allclose(bump_exponent_gradient(x)[:, axis], fd, atol=1e-8)

    def test_alpha_clamped_below_sobolev_conjugate(self):
        profile = ExponentProfile(constant_exponent(1.5), alpha_offset=10.0)
        x = np.zeros((1, 2))
        self.assertLess(profile.alpha_at(x)[0], 6.0)
        self.assertGreater(profile.alpha_at(x)[0], 5.99)

    def test_exponent_field_on_grid(self):
        grid = Grid.symmetric(1, 5.0, 51)
        field = get_instance("paper-example").exponent_field(grid)
        self.assertGreater(field.p_minus, 2.0)
        self.assertLess(field.p_plus, 2.6)

    def test_inline_instance(self):
        spec = InlineInstance.model_validate(
            {"p": {"kind": "linear", "value": 2.0, "slope": 0.1}, "V": {"base": 2.0, "curvature": 1.0},
             "f": {"kind": "power", "exponent": 4.0}}
        )
        instance = inline_instance(spec, name="custom")
        self.assertEqual(instance.name, "custom")
        np.testing.assert_allclose(instance.p([[1.0]]), [2.1])
        np.testing.assert_allclose(instance.V([[1.0]]), [3.0])
        np.testing.assert_allclose(instance.F([[0.0]], [2.0]), [4.0])

    def test_with_certificates(self):
        instance = get_instance("paper-example")
        certified = instance.with_certificates([check_H3(instance, X_SAMPLES), check_AR(instance, X_SAMPLES)])
        self.assertEqual(certified.certified, frozenset({"H3"}))


class TestCheckV(unittest.TestCase):
    def test_growing_potential(self):
        report = check_V(_variant(Zero(), quadratic_potential(1.0, 1.0)))
        self.assertEqual(report.verdict, Verdict.CERTIFIED)
        self.assertEqual(report.constants["V0"], 1.0)

    def test_constant_potential(self):
        report = check_V(_variant(Zero(), quadratic_potential(1.0, 0.0)))
        self.assertEqual(report.verdict, Verdict.VIOLATED)
        self.assertEqual(report.witness.x, [64.0])

    def test_vanishing_infimum(self):
        report = check_V(_variant(Zero(), quadratic_potential(0.0, 1.0)))
        self.assertEqual(report.verdict, Verdict.VIOLATED)
        self.assertEqual(report.witness.x, [0.0])

    def test_two_dimensional_rays(self):
        report = check_V(_variant(Zero(), quadratic_potential(1.0, 1.0)), dimension=2)
        self.assertTrue(report.certified)


class TestCheckH0(unittest.TestCase):
    def test_power_log_example(self):
        report = check_H0(get_instance("paper-example"), X_SAMPLES)
        self.assertEqual(report.verdict, Verdict.CERTIFIED)
        self.assertTrue(np.isfinite(report.constants["C"]))
        self.assertGreater(report.constants["C"], 0.0)

    def test_exponential(self):
        report = check_H0(_variant(Exponential()), X_SAMPLES)
        self.assertEqual(report.verdict, Verdict.VIOLATED)
        self.assertIsNotNone(report.witness)

    def test_zero(self):
        report = check_H0(_variant(Zero()), X_SAMPLES)
        self.assertEqual(report.verdict, Verdict.CERTIFIED)
        self.assertEqual(report.constants["C"], 0.0)


class TestCheckH1(unittest.TestCase):
    def test_power_log_example(self):
        report = check_H1(get_instance("paper-example"), X_SAMPLES)
        self.assertEqual(report.verdict, Verdict.CERTIFIED)
        self.assertGreater(report.constants["C1"], 0.0)
        self.assertGreater(report.constants["C2"], 0.0)
        self.assertIn("M", report.constants)

    def test_pure_power(self):
        report = check_H1(get_instance("pure-power"), X_SAMPLES)
        self.assertEqual(report.verdict, Verdict.VIOLATED)
        self.assertIn("tf - pF", report.witness.detail)

    def test_zero(self):
        report = check_H1(_variant(Zero()), X_SAMPLES)
        self.assertEqual(report.verdict, Verdict.VIOLATED)
        self.assertIsNotNone(report.witness)


class TestCheckH2(unittest.TestCase):
    def test_power_log_example(self):
        self.assertEqual(check_H2(get_instance("paper-example"), X_SAMPLES).verdict, Verdict.CERTIFIED)

    def test_pure_power(self):
        report = check_H2(get_instance("pure-power"), X_SAMPLES)
        self.assertEqual(report.verdict, Verdict.VIOLATED)
        self.assertIsNotNone(report.witness)

    def test_extra_power(self):
        profile = get_instance("paper-example").exponent
        instance = _variant(Power(lambda x: profile.p_at(x) + 1.0))
        self.assertEqual(check_H2(instance, X_SAMPLES).verdict, Verdict.CERTIFIED)


class TestCheckH3(unittest.TestCase):
    def test_power_log_example(self):
        self.assertEqual(check_H3(get_instance("paper-example"), X_SAMPLES).verdict, Verdict.CERTIFIED)

    def test_square_fails_at_one(self):
        report = check_H3(_variant(Square()), X_SAMPLES, t_samples=[1.0])
        self.assertEqual(report.verdict, Verdict.VIOLATED)
        self.assertEqual(report.witness.t, 1.0)

    def test_square_default_samples(self):
        report = check_H3(_variant(Square()), X_SAMPLES)
        self.assertEqual(report.witness.t, 1.0)

    def test_zero(self):
        self.assertEqual(check_H3(_variant(Zero()), X_SAMPLES).verdict, Verdict.CERTIFIED)


class TestCheckAR(unittest.TestCase):
    def test_power_log_example_fails(self):
        report = check_AR(get_instance("paper-example"), X_SAMPLES)
        self.assertEqual(report.verdict, Verdict.VIOLATED)
        self.assertIsNotNone(report.witness)
        p_plus = report.constants["p_plus"]
        self.assertIn(f"theta = {p_plus + 0.1:.6g}", report.witness.detail)

    def test_power_above_p_plus(self):
        report = check_AR(_variant(Power(3.0)), X_SAMPLES, thetas=[3.0])
        self.assertEqual(report.verdict, Verdict.CERTIFIED)
        self.assertEqual(report.constants["theta"], 3.0)

    def test_power_above_p_plus_on_the_default_grid(self):
        report = check_AR(_variant(Power(3.0)), X_SAMPLES)
        self.assertEqual(report.verdict, Verdict.CERTIFIED)
        self.assertAlmostEqual(report.constants["theta"], 3.0, delta=1e-12)

    def test_pure_power_has_no_theta_above_p_plus(self):
        report = check_AR(get_instance("pure-power"), X_SAMPLES)
        self.assertEqual(report.verdict, Verdict.VIOLATED)

    def test_largest_passing_theta(self):
        report = check_AR(_variant(Power(3.0)), X_SAMPLES, thetas=[2.6, 2.8, 3.0, 3.5])
        self.assertEqual(report.constants["theta"], 3.0)

    def test_zero_is_inconclusive(self):
        self.assertEqual(check_AR(_variant(Zero()), X_SAMPLES).verdict, Verdict.INCONCLUSIVE)


def test_power_log_example_joint_verdict():
    instance = get_instance("paper-example")
    verdicts = {
        report.name: report.verdict
        for report in (
            check_H0(instance, X_SAMPLES),
            check_H1(instance, X_SAMPLES),
            check_H2(instance, X_SAMPLES),
            check_H3(instance, X_SAMPLES),
            check_AR(instance, X_SAMPLES),
        )
    }
    assert verdicts == {
        "H0": Verdict.CERTIFIED,
        "H1": Verdict.CERTIFIED,
        "H2": Verdict.CERTIFIED,
        "H3": Verdict.CERTIFIED,
        "AR": Verdict.VIOLATED,
    }


@pytest.mark.parametrize("name", sorted(BUILTIN_INSTANCES))
def test_violations_carry_witnesses(name):
    instance = get_instance(name)
    for check in (check_H0, check_H1, check_H2, check_H3, check_AR):
        report = check(instance, X_SAMPLES)
        if report.verdict is Verdict.VIOLATED:
            assert report.witness is not None
