"""Discrete variable-exponent Lebesgue and Sobolev machinery.

The modular of u with exponent p is rho(u) = sum_i w_i |u_i|^{p_i}; the
Luxemburg norm is the unique lambda with rho(u / lambda) = 1. The X-norm
uses the combined modular

    h^N sum_c |grad u|_c^{p_c}  +  sum_i w_i V_i |u_i|^{p_i}

with cell quadrature for the gradient part and nodal quadrature for the
potential part. Luxemburg norms are absolutely homogeneous; modulars are not
once the exponent varies.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize

from vexp_solver.grid_core import Grid, GridFunction, cell_average, cell_gradient
from vexp_solver.shared_libraries import constants
from vexp_solver.shared_libraries.errors import (
    DomainError,
    HypothesisViolation,
    WitnessUndefined,
)
from vexp_solver.shared_libraries.types import EmbeddingEstimate

logger = logging.getLogger(__name__)

PointFunction = Callable[[NDArray[np.float64]], ArrayLike]


@dataclass(frozen=True)
class ExponentField:
    """Nodal exponent data p, grad p, alpha and a on one grid."""

    grid: Grid
    p: NDArray[np.float64]
    grad_p: NDArray[np.float64]
    alpha: NDArray[np.float64]
    a: NDArray[np.float64]
    margin: float = constants.EXPONENT_MARGIN
    strict: bool = True

    def __post_init__(self) -> None:
        size = self.grid.size
        for name in ("p", "alpha", "a"):
            values = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), (size,)).copy()
            values.setflags(write=False)
            object.__setattr__(self, name, values)
        grad = np.asarray(self.grad_p, dtype=float).reshape(size, self.grid.dimension)
        object.__setattr__(self, "grad_p", grad)
        if self.strict:
            self.check_invariants()

    @classmethod
    def from_functions(
        cls,
        grid: Grid,
        p: PointFunction,
        alpha: PointFunction,
        a: PointFunction,
        grad_p: PointFunction | None = None,
        strict: bool = True,
    ) -> ExponentField:
        """Sample exponent functions on the grid nodes.

        grad_p falls back to central differences of the sampled p.
        """
        x = grid.coordinates
        p_values = np.broadcast_to(np.asarray(p(x), dtype=float), (grid.size,))
        if grad_p is not None:
            grad = np.broadcast_to(np.asarray(grad_p(x), dtype=float), (grid.size, grid.dimension))
        else:
            grad = _central_gradient(grid, p_values)
        return cls(grid, p_values, grad, alpha(x), a(x), strict=strict)

    @property
    def p_minus(self) -> float:
        return float(self.p.min())

    @property
    def p_plus(self) -> float:
        return float(self.p.max())

    @property
    def alpha_plus(self) -> float:
        return float(self.alpha.max())

    @property
    def alpha_minus(self) -> float:
        return float(self.alpha.min())

    @cached_property
    def p_star(self) -> NDArray[np.float64]:
        """Sobolev conjugate N p / (N - p), with a large sentinel where p >= N."""
        n = self.grid.dimension
        star = np.full(self.grid.size, constants.SOBOLEV_SENTINEL)
        below = self.p < n
        star[below] = n * self.p[below] / (n - self.p[below])
        return star

    @cached_property
    def cell_p(self) -> NDArray[np.float64]:
        """Per-cell exponent: the average of the corner values."""
        return cell_average(self.grid, self.p)

    def check_invariants(self) -> None:
        """Raise HypothesisViolation unless (p), (H0) and (H1) exponent bounds hold."""
        if not self.p_minus > 1.0:
            raise HypothesisViolation(f"p- = {self.p_minus} must exceed 1")
        if not np.all(np.isfinite(self.grad_p)):
            raise HypothesisViolation("grad p is not bounded")
        gap = self.alpha - self.p
        if gap.min() < self.margin:
            node = int(np.argmin(gap))
            raise HypothesisViolation(f"alpha - p = {gap[node]:.3g} below margin at node {node}")
        finite = self.p_star < constants.SOBOLEV_SENTINEL
        if np.any(finite):
            headroom = self.p_star[finite] - self.alpha[finite]
            if headroom.min() < self.margin:
                raise HypothesisViolation(f"alpha reaches p* (headroom {headroom.min():.3g})")
        lead = self.a - self.p
        if lead.min() < self.margin:
            node = int(np.argmin(lead))
            raise HypothesisViolation(f"a - p = {lead[node]:.3g} below margin at node {node}")


def _central_gradient(grid: Grid, nodal: NDArray[np.float64]) -> NDArray[np.float64]:
    shaped = np.asarray(nodal, dtype=float).reshape(grid.shape)
    parts = np.gradient(shaped, grid.spacing)
    if grid.dimension == 1:
        parts = [parts]
    return np.stack([part.ravel() for part in parts], axis=1)


def _values(u: GridFunction | ArrayLike) -> NDArray[np.float64]:
    return u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)


def _checked_exponent(exponent: ArrayLike, size: int) -> NDArray[np.float64]:
    exponent = np.broadcast_to(np.asarray(exponent, dtype=float), (size,))
    if np.any(exponent < 1.0):
        node = int(np.argmin(exponent))
        raise DomainError(f"exponent {exponent[node]} < 1 at node {node}")
    return exponent


def _signed_power(t: NDArray[np.float64], exponent: NDArray[np.float64] | float) -> NDArray[np.float64]:
    """|t|^{q-2} t written as sign(t) |t|^{q-1}, finite at t = 0."""
    return np.sign(t) * np.abs(t) ** (exponent - 1.0)


def modular(u: GridFunction, exponent: ArrayLike) -> float:
    """rho(u) = sum_i w_i |u_i|^{p_i}."""
    grid = u.grid
    exponent = _checked_exponent(exponent, grid.size)
    with np.errstate(over="ignore"):
        return float(np.dot(grid.weights, np.abs(u.values) ** exponent))


def _luxemburg_root(scaled_modular: Callable[[float], float], scale_hint: float) -> float:
    """Solve scaled_modular(lambda) = 1 for the decreasing map lambda -> rho(u/lambda)."""
    hi = max(1.0, scale_hint)
    while scaled_modular(hi) > 1.0:
        hi *= 2.0
    lo = hi
    while scaled_modular(lo) < 1.0 and lo > constants.LUXEMBURG_FLOOR:
        lo *= 0.5
    if scaled_modular(lo) == 1.0:
        return lo
    if scaled_modular(hi) == 1.0:
        return hi
    return float(
        optimize.bisect(
            lambda lam: scaled_modular(lam) - 1.0,
            lo,
            hi,
            xtol=constants.LUXEMBURG_FLOOR,
            rtol=constants.LUXEMBURG_RTOL,
            maxiter=400,
        )
    )


def luxemburg_norm(u: GridFunction, exponent: ArrayLike) -> float:
    """inf{lambda > 0 : rho(u / lambda) <= 1}; zero for u = 0."""
    grid = u.grid
    exponent = _checked_exponent(exponent, grid.size)
    if u.is_zero:
        return 0.0
    magnitude = np.abs(u.values)
    weights = grid.weights

    def scaled(lam: float) -> float:
        with np.errstate(over="ignore"):
            return float(np.dot(weights, (magnitude / lam) ** exponent))

    return _luxemburg_root(scaled, float(magnitude.max()) * grid.measure)


def _checked_potential(grid: Grid, V: ArrayLike) -> NDArray[np.float64]:
    V = np.broadcast_to(np.asarray(V, dtype=float), (grid.size,))
    if np.any(V <= 0.0):
        node = int(np.argmin(V))
        raise HypothesisViolation(f"(V) requires V > 0; V = {V[node]} at node {node}")
    return V


def x_modular(u: GridFunction, field: ExponentField, V: ArrayLike) -> float:
    """int |grad u|^p + V |u|^p with cell and nodal quadrature."""
    grid = u.grid
    V = _checked_potential(grid, V)
    slope = np.linalg.norm(cell_gradient(u), axis=1)
    with np.errstate(over="ignore"):
        gradient_part = grid.cell_volume * np.sum(slope**field.cell_p)
        potential_part = np.dot(grid.weights * V, np.abs(u.values) ** field.p)
    return float(gradient_part + potential_part)


def x_norm(u: GridFunction, field: ExponentField, V: ArrayLike) -> float:
    """Luxemburg norm of the combined gradient + potential modular."""
    grid = u.grid
    V = _checked_potential(grid, V)
    if u.is_zero:
        return 0.0
    slope = np.linalg.norm(cell_gradient(u), axis=1)
    magnitude = np.abs(u.values)
    cell_weight = grid.cell_volume
    node_weight = grid.weights * V

    def scaled(lam: float) -> float:
        with np.errstate(over="ignore"):
            return float(
                cell_weight * np.sum((slope / lam) ** field.cell_p)
                + np.dot(node_weight, (magnitude / lam) ** field.p)
            )

    hint = max(float(magnitude.max()), float(slope.max(initial=0.0))) * grid.measure
    return _luxemburg_root(scaled, hint)


def sobolev_norm(u: GridFunction, field: ExponentField) -> float:
    """W^{1,p} norm |u|_p + | |grad u| |_p."""
    grid = u.grid
    value_part = luxemburg_norm(u, field.p)
    slope = np.linalg.norm(cell_gradient(u), axis=1)
    if not np.any(slope):
        return value_part

    def scaled(lam: float) -> float:
        with np.errstate(over="ignore"):
            return float(grid.cell_volume * np.sum((slope / lam) ** field.cell_p))

    return value_part + _luxemburg_root(scaled, float(slope.max()) * grid.measure)


def luxemburg_gradient(u: GridFunction, exponent: ArrayLike) -> NDArray[np.float64]:
    """Derivative of luxemburg_norm with respect to the nodal values.

    Implicit differentiation of rho(u / lambda) = 1.
    """
    grid = u.grid
    exponent = _checked_exponent(exponent, grid.size)
    lam = luxemburg_norm(u, exponent)
    if lam == 0.0:
        return np.zeros(grid.size)
    v = u.values / lam
    numerator = grid.weights * exponent * _signed_power(v, exponent)
    denominator = np.dot(grid.weights * exponent, np.abs(v) ** exponent)
    return numerator / denominator


def x_norm_gradient(u: GridFunction, field: ExponentField, V: ArrayLike) -> NDArray[np.float64]:
    """Derivative of x_norm with respect to the nodal values."""
    grid = u.grid
    V = _checked_potential(grid, V)
    lam = x_norm(u, field, V)
    if lam == 0.0:
        return np.zeros(grid.size)
    v = u / lam
    G = cell_gradient(v)
    regularized = np.sqrt(np.sum(G**2, axis=1) + constants.GRADIENT_EPS**2)
    flux_scale = grid.cell_volume * field.cell_p * regularized ** (field.cell_p - 2.0)
    numerator = sum(
        D.T @ (flux_scale * G[:, k]) for k, D in enumerate(grid.difference_operators)
    )
    numerator = numerator + grid.weights * V * field.p * _signed_power(v.values, field.p)
    slope = np.linalg.norm(G, axis=1)
    denominator = grid.cell_volume * np.sum(field.cell_p * slope**field.cell_p) + np.dot(
        grid.weights * V * field.p, np.abs(v.values) ** field.p
    )
    return numerator / denominator


def conjugate_exponent(p: ArrayLike) -> NDArray[np.float64]:
    """q with 1/p + 1/q = 1."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 1.0):
        raise DomainError(f"conjugate exponent needs p > 1, got min {p.min()}")
    return p / (p - 1.0)


def holder_defect(u: GridFunction, v: GridFunction, p: ArrayLike) -> float:
    """(1/p- + 1/q-) |u|_p |v|_q - |int u v|; nonnegative up to rounding."""
    grid = u.grid
    p = np.broadcast_to(np.asarray(p, dtype=float), (grid.size,))
    q = conjugate_exponent(p)
    constant = 1.0 / p.min() + 1.0 / q.min()
    bound = constant * luxemburg_norm(u, p) * luxemburg_norm(v, q)
    return float(bound - abs(np.dot(grid.weights, u.values * v.values)))


def modular_norm_witness(u: GridFunction, p: ArrayLike) -> float:
    """Exponent s with |u|_p^s = rho(u); lies in [p-, p+].

    Raises:
        DomainError: for u = 0.
        WitnessUndefined: when the norm equals 1 (then rho(u) = 1 as well).
    """
    if u.is_zero:
        raise DomainError("the witness exponent is undefined for u = 0")
    lam = luxemburg_norm(u, p)
    log_norm = np.log(lam)
    if abs(log_norm) < 1e-10:
        raise WitnessUndefined(f"|u| = {lam!r} is numerically 1")
    return float(np.log(modular(u, p)) / log_norm)


def random_directions(
    grid: Grid, count: int, rng: np.random.Generator, modes: int = 8, noise: float = 0.05
) -> list[GridFunction]:
    """Smooth random members of the discrete X: low sine modes plus a little noise."""
    basis = grid.sine_modes(modes)
    directions = []
    for _ in range(count):
        values = rng.standard_normal(basis.shape[0]) @ basis
        values = values + noise * np.abs(values).max() * rng.standard_normal(grid.size)
        values[grid.boundary_mask] = 0.0
        directions.append(GridFunction(grid, values))
    return directions


def embedding_constant(
    field: ExponentField, V: ArrayLike, trials: int, seed: int = 0
) -> EmbeddingEstimate:
    """Running maximum of |u|_alpha / ||u|| over random u: a lower bound for C0."""
    rng = np.random.default_rng(seed)
    best = 0.0
    running: list[float] = []
    for u in random_directions(field.grid, trials, rng):
        ratio = luxemburg_norm(u, field.alpha) / x_norm(u, field, V)
        best = max(best, ratio)
        running.append(best)
    logger.info(f"Embedding constant lower bound after {trials} trials: {best:.6g}")
    return EmbeddingEstimate(value=best, running_max=running, trials=trials)
