"""Problem instances: exponent profile, potential V and nonlinearity f.

Built-in instances are looked up by name through get_instance; inline
instances are assembled from the coefficient tables of a run config.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vexp_solver.grid_core import Grid
from vexp_solver.problem_def.nonlinearities import (
    BoundNonlinearity,
    Nonlinearity,
    Power,
    PowerLog,
    Zero,
)
from vexp_solver.shared_libraries import constants
from vexp_solver.shared_libraries.errors import DomainError
from vexp_solver.shared_libraries.types import (
    ExponentSpec,
    HypothesisReport,
    InlineInstance,
    NonlinearitySpec,
    PotentialSpec,
)
from vexp_solver.vexp_spaces import ExponentField

logger = logging.getLogger(__name__)

PointFunction = Callable[[NDArray[np.float64]], ArrayLike]
GradientFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]


def _points(x: ArrayLike) -> NDArray[np.float64]:
    return np.atleast_2d(np.asarray(x, dtype=float))


def _sobolev_conjugate(p: NDArray[np.float64], dimension: int) -> NDArray[np.float64]:
    star = np.full(p.shape, np.inf)
    below = p < dimension
    star[below] = dimension * p[below] / (dimension - p[below])
    return star


@dataclass(frozen=True)
class ExponentProfile:
    """p(x) with its gradient, and the offsets that define alpha and a.

    alpha = p + alpha_offset, clamped to stay 2 * margin below p* where p < N;
    a = p + a_offset.
    """

    p: PointFunction
    grad_p: GradientFunction | None = None
    alpha_offset: float = 0.5
    a_offset: float = 1.0

    def p_at(self, x: ArrayLike) -> NDArray[np.float64]:
        x = _points(x)
        return np.broadcast_to(np.asarray(self.p(x), dtype=float), (x.shape[0],)).copy()

    def alpha_at(self, x: ArrayLike) -> NDArray[np.float64]:
        x = _points(x)
        p = self.p_at(x)
        ceiling = _sobolev_conjugate(p, x.shape[1]) - 2.0 * constants.EXPONENT_MARGIN
        return np.minimum(p + self.alpha_offset, ceiling)

    def a_at(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.p_at(x) + self.a_offset

    def field(self, grid: Grid, strict: bool = True) -> ExponentField:
        return ExponentField.from_functions(
            grid, self.p_at, self.alpha_at, self.a_at, grad_p=self.grad_p, strict=strict
        )


def constant_exponent(value: float) -> PointFunction:
    return lambda x: np.full(_points(x).shape[0], value)


def _zero_gradient(x: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.zeros_like(_points(x))


def linear_exponent(value: float, slope: float) -> tuple[PointFunction, GradientFunction]:
    """p(x) = value + slope * x_1."""

    def p(x: NDArray[np.float64]) -> NDArray[np.float64]:
        return value + slope * _points(x)[:, 0]

    def grad(x: NDArray[np.float64]) -> NDArray[np.float64]:
        out = np.zeros_like(_points(x))
        out[:, 0] = slope
        return out

    return p, grad


def bump_exponent(x: ArrayLike) -> NDArray[np.float64]:
    """2 + 1/(2(1 + |x|^2)) + x_1 exp(-|x|^2 / 2) / 10; strictly above 2 on every grid."""
    x = _points(x)
    r2 = np.sum(x * x, axis=1)
    return 2.0 + 0.5 / (1.0 + r2) + 0.1 * x[:, 0] * np.exp(-0.5 * r2)


def bump_exponent_gradient(x: ArrayLike) -> NDArray[np.float64]:
    x = _points(x)
    r2 = np.sum(x * x, axis=1)
    grad = -x / (1.0 + r2)[:, None] ** 2
    bump = 0.1 * np.exp(-0.5 * r2)
    grad = grad - (bump * x[:, 0])[:, None] * x
    grad[:, 0] += bump
    return grad


def quadratic_potential(base: float, curvature: float) -> PointFunction:
    """V(x) = base + curvature |x|^2."""
    return lambda x: base + curvature * np.sum(_points(x) ** 2, axis=1)


@dataclass(frozen=True)
class ProblemInstance:
    """One concrete problem: exponents, V and f, plus its certified hypotheses."""

    name: str
    exponent: ExponentProfile
    potential: PointFunction
    nonlinearity: Nonlinearity
    certified: frozenset[str] = field(default_factory=frozenset)

    def V(self, x: ArrayLike) -> NDArray[np.float64]:
        x = _points(x)
        return np.broadcast_to(np.asarray(self.potential(x), dtype=float), (x.shape[0],)).copy()

    def p(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.exponent.p_at(x)

    def alpha(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.exponent.alpha_at(x)

    def a(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.exponent.a_at(x)

    def f(self, x: ArrayLike, t: ArrayLike) -> NDArray[np.float64]:
        return self.nonlinearity.f(_points(x), t)

    def F(self, x: ArrayLike, t: ArrayLike) -> NDArray[np.float64]:
        return self.nonlinearity.F(_points(x), t)

    def bind(self, x: ArrayLike) -> BoundNonlinearity:
        return self.nonlinearity.bind(_points(x))

    @property
    def closed_form(self) -> bool:
        return self.nonlinearity.closed_form

    def exponent_field(self, grid: Grid, strict: bool = True) -> ExponentField:
        return self.exponent.field(grid, strict=strict)

    def with_certificates(self, reports: Iterable[HypothesisReport]) -> ProblemInstance:
        passed = {report.name for report in reports if report.certified}
        return replace(self, certified=self.certified | passed)


def power_log_example() -> ProblemInstance:
    """f = |t|^{p-2} t [ln(1+|t|)]^{p+1}, variable p, V = 1 + |x|^2."""
    profile = ExponentProfile(bump_exponent, bump_exponent_gradient, alpha_offset=0.5, a_offset=1.0)
    return ProblemInstance(
        name="paper-example",
        exponent=profile,
        potential=quadratic_potential(1.0, 1.0),
        nonlinearity=PowerLog(profile.p_at, profile.a_at),
    )


def cubic_constant_exponent() -> ProblemInstance:
    """p = 2, V = 1, f = t^3; ground state sqrt(2) sech(x) in one dimension."""
    profile = ExponentProfile(constant_exponent(2.0), _zero_gradient, alpha_offset=2.0, a_offset=1.0)
    return ProblemInstance(
        name="cubic-constant-exponent",
        exponent=profile,
        potential=quadratic_potential(1.0, 0.0),
        nonlinearity=Power(4.0),
    )


def pure_power() -> ProblemInstance:
    """f = |t|^{p-2} t with the variable exponent of the power-log example."""
    profile = ExponentProfile(bump_exponent, bump_exponent_gradient, alpha_offset=0.5, a_offset=1.0)
    return ProblemInstance(
        name="pure-power",
        exponent=profile,
        potential=quadratic_potential(1.0, 1.0),
        nonlinearity=Power(profile.p_at),
    )


BUILTIN_INSTANCES: dict[str, Callable[[], ProblemInstance]] = {
    "paper-example": power_log_example,
    "cubic-constant-exponent": cubic_constant_exponent,
    "pure-power": pure_power,
}


def get_instance(name: str) -> ProblemInstance:
    try:
        return BUILTIN_INSTANCES[name]()
    except KeyError:
        raise DomainError(
            f"unknown instance {name!r}; built-ins are {sorted(BUILTIN_INSTANCES)}"
        ) from None


def _exponent_from_spec(spec: ExponentSpec) -> tuple[PointFunction, GradientFunction]:
    if spec.kind == "constant":
        return constant_exponent(spec.value), _zero_gradient
    if spec.kind == "linear":
        return linear_exponent(spec.value, spec.slope)
    return bump_exponent, bump_exponent_gradient


def _nonlinearity_from_spec(spec: NonlinearitySpec, profile: ExponentProfile) -> Nonlinearity:
    if spec.kind == "zero":
        return Zero()
    if spec.kind == "power-log":
        return PowerLog(profile.p_at, profile.a_at, scale=spec.scale)
    exponent = spec.exponent if spec.exponent is not None else profile.p_at
    return Power(exponent, scale=spec.scale)


def inline_instance(spec: InlineInstance, name: str = "inline") -> ProblemInstance:
    """Assemble an instance from config coefficient tables."""
    p, grad = _exponent_from_spec(spec.p)
    profile = ExponentProfile(p, grad, alpha_offset=spec.alpha_offset, a_offset=spec.a_offset)
    potential: PotentialSpec = spec.V
    return ProblemInstance(
        name=name,
        exponent=profile,
        potential=quadratic_potential(potential.base, potential.curvature),
        nonlinearity=_nonlinearity_from_spec(spec.f, profile),
    )
