"""Geometric checks behind the mountain-pass argument.

- verify_cone_lemma: (x - x0) . grad p(x) > 0 on the cone set around x0, and
  the max of p over the ball sits on the cone cap.
- verify_blowdown: phi(t h) -> -infinity along t = 2^k for a cone bump h.
- verify_mp_geometry: phi >= delta on a small sampled sphere, plus a far
  point e with phi(e) < 0.

All certifications are node- or sample-based and reported as such.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize

from vexp_solver.energy import EnergyAssembly
from vexp_solver.grid_core import Grid, GridFunction
from vexp_solver.shared_libraries import constants
from vexp_solver.shared_libraries.errors import (
    DomainError,
    EnergyOverflowError,
    InvalidGeometryError,
    PreconditionError,
)
from vexp_solver.shared_libraries.types import (
    BlowdownReport,
    ConeLemmaReport,
    ConeLemmaRow,
    GeometryReport,
    SphereSample,
    Verdict,
)
from vexp_solver.vexp_spaces import ExponentField, random_directions, x_norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConeTestFunction:
    """h(x) = max(eps - |x - x0|, 0) sampled on the nodes."""

    center: NDArray[np.float64]
    radius: float
    values: GridFunction

    @classmethod
    def build(cls, grid: Grid, center: ArrayLike, radius: float) -> ConeTestFunction:
        if radius <= 0:
            raise DomainError(f"cone radius must be positive, got {radius}")
        center = np.atleast_1d(np.asarray(center, dtype=float))
        distance = np.linalg.norm(grid.coordinates - center, axis=1)
        values = GridFunction(grid, np.maximum(radius - distance, 0.0)).with_zero_trace()
        if values.is_zero:
            raise DomainError(f"cone of radius {radius} at {center.tolist()} misses every interior node")
        return cls(center, float(radius), values)

    @property
    def support(self) -> NDArray[np.bool_]:
        return self.values.values > 0.0


@dataclass(frozen=True)
class ConeSet:
    """B(x0, eps, delta, theta): delta <= |x - x0| <= eps within angle theta of grad p(x0)."""

    center: NDArray[np.float64]
    epsilon: float
    delta: float
    theta: float
    direction: NDArray[np.float64]

    def __post_init__(self) -> None:
        if not 0.0 < self.theta < 0.5 * np.pi:
            raise DomainError(f"theta must lie in (0, pi/2), got {self.theta}")
        if self.delta > self.epsilon:
            raise DomainError(f"delta = {self.delta} exceeds eps = {self.epsilon}")

    def contains(self, points: ArrayLike) -> NDArray[np.bool_]:
        offsets = np.atleast_2d(np.asarray(points, dtype=float)) - self.center
        distance = np.linalg.norm(offsets, axis=1)
        cosine = np.divide(
            offsets @ self.direction, distance, out=np.full(distance.shape, -1.0), where=distance > 0
        )
        return (distance >= self.delta) & (distance <= self.epsilon) & (distance > 0) & (
            cosine >= np.cos(self.theta)
        )


def verify_cone_lemma(
    field: ExponentField,
    center: ArrayLike,
    epsilons: Sequence[float],
    delta: float,
    theta: float,
) -> ConeLemmaReport:
    """Check the cone geometry of p around x0 for each eps, reporting the smallest certifying eps.

    Raises:
        PreconditionError: grad p vanishes at x0.
    """
    grid = field.grid
    center = np.atleast_1d(np.asarray(center, dtype=float))
    node = grid.node_index(center)
    slope = field.grad_p[node]
    magnitude = float(np.linalg.norm(slope))
    if magnitude <= 1e-14:
        raise PreconditionError(f"grad p(x0) = 0 at {center.tolist()}; the cone lemma is inapplicable")
    direction = slope / magnitude
    offsets = grid.coordinates - center
    distance = np.linalg.norm(offsets, axis=1)
    rows: list[ConeLemmaRow] = []
    certifying: Optional[float] = None
    for epsilon in sorted(epsilons):
        cone = ConeSet(center, float(epsilon), delta, theta, direction)
        inside = cone.contains(grid.coordinates)
        dot_positive = bool(inside.any()) and bool(
            np.all(np.sum(offsets[inside] * field.grad_p[inside], axis=1) > 0.0)
        )
        ball = distance <= epsilon
        cap = inside & (distance >= epsilon - grid.spacing)
        max_on_cap = bool(cap.any()) and bool(field.p[ball].max() <= field.p[cap].max() + 1e-14)
        rows.append(
            ConeLemmaRow(
                epsilon=float(epsilon),
                nodes_in_cone=int(inside.sum()),
                dot_product_positive=dot_positive,
                max_on_cap=max_on_cap,
            )
        )
        if certifying is None and dot_positive and max_on_cap:
            certifying = float(epsilon)
    verdict = Verdict.CERTIFIED if certifying is not None else Verdict.NOT_CERTIFIED
    logger.info(f"Cone lemma at {center.tolist()}: {verdict.value} (eps = {certifying})")
    return ConeLemmaReport(verdict=verdict, certifying_epsilon=certifying, rows=rows)


def _ray_energy(assembly: EnergyAssembly, h: GridFunction, t: float) -> float:
    return assembly.energy(t * h)


def verify_blowdown(
    assembly: EnergyAssembly,
    cone: ConeTestFunction | GridFunction,
    t_values: Optional[Sequence[float]] = None,
) -> BlowdownReport:
    """Track phi(t h) along t = 2^k until it drops below the floor and keeps falling."""
    h = cone.values if isinstance(cone, ConeTestFunction) else cone
    if t_values is None:
        t_values = [2.0**k for k in range(constants.BLOWDOWN_MAX_DOUBLINGS + 1)]
    evaluated: list[float] = []
    energies: list[float] = []
    deep_index: Optional[int] = None
    overflow = False
    for t in t_values:
        try:
            value = _ray_energy(assembly, h, float(t))
        except EnergyOverflowError:
            overflow = True
            break
        evaluated.append(float(t))
        energies.append(value)
        if deep_index is None and value < constants.BLOWDOWN_FLOOR:
            deep_index = len(energies) - 1
        if deep_index is not None and len(energies) - 1 - deep_index >= constants.BLOWDOWN_CONFIRM:
            break

    report = BlowdownReport(
        verdict=Verdict.NOT_CERTIFIED,
        t_values=evaluated,
        energies=energies,
        largest_t=evaluated[-1] if evaluated else None,
    )
    negative = [i for i, value in enumerate(energies) if value < 0.0]
    if negative:
        report.zero_crossing_t = _zero_crossing(assembly, h, evaluated, energies, negative[0])
    if deep_index is None:
        report.verdict = Verdict.INCONCLUSIVE if overflow else Verdict.NOT_CERTIFIED
        logger.info(f"Blow-down not observed up to t = {report.largest_t} (overflow: {overflow})")
        return report

    report.deep_crossing_t = evaluated[deep_index]
    peak = int(np.argmax(energies))
    tail = np.asarray(energies[peak:])
    if np.all(np.diff(tail) < 0.0):
        report.verdict = Verdict.CERTIFIED
    logger.info(
        f"Blow-down {report.verdict.value}: phi < 0 from t = {report.zero_crossing_t}, "
        f"phi < {constants.BLOWDOWN_FLOOR:g} at t = {report.deep_crossing_t}"
    )
    return report


def _zero_crossing(
    assembly: EnergyAssembly,
    h: GridFunction,
    t_values: list[float],
    energies: list[float],
    index: int,
) -> Optional[float]:
    if index > 0 and energies[index - 1] >= 0.0:
        lo, hi = t_values[index - 1], t_values[index]
    else:
        lo, hi = t_values[index] * 1e-6, t_values[index]
        if _ray_energy(assembly, h, lo) < 0.0:
            return None
    return float(
        optimize.brentq(lambda t: _ray_energy(assembly, h, t), lo, hi, xtol=1e-14 * hi, rtol=1e-13)
    )


def default_cone(assembly: EnergyAssembly, radius: float) -> ConeTestFunction:
    """Cone at the box center with radius capped at half the half-width."""
    grid = assembly.grid
    center = np.full(grid.dimension, 0.5 * (grid.lower + grid.upper))
    return ConeTestFunction.build(grid, center, min(radius, 0.5 * grid.half_width))


def far_point(assembly: EnergyAssembly, cone: Optional[ConeTestFunction] = None, radius: float = 2.0) -> GridFunction:
    """e = t h with t doubled from 1 until phi(e) < 0; h is mirrored for the minus variant.

    Raises:
        InvalidGeometryError: phi(t h) stays nonnegative over every doubling.
    """
    cone = cone if cone is not None else default_cone(assembly, radius)
    h = -cone.values if assembly.variant == "minus" else cone.values
    t = 1.0
    for _ in range(constants.ENDPOINT_DOUBLINGS):
        try:
            if assembly.energy(t * h) < 0.0:
                return t * h
        except EnergyOverflowError:
            break
        t *= 2.0
    raise InvalidGeometryError(f"phi(t h) never dropped below 0 (last t = {t:g})")


def verify_mp_geometry(
    assembly: EnergyAssembly,
    radii: Sequence[float],
    samples: int,
    seed: int = 0,
    far: Optional[GridFunction] = None,
) -> GeometryReport:
    """Sampled phi-minimum on X-spheres of each radius, plus a far point with phi < 0.

    Sampled minima are upper bounds for the true sphere minima, so the
    verdict is heuristic.
    """
    grid = assembly.grid
    field = assembly.exponents
    V = assembly.potential
    rng = np.random.default_rng(seed)
    directions = [d / x_norm(d, field, V) for d in random_directions(grid, samples, rng)]
    spheres: list[SphereSample] = []
    for radius in sorted(radii):
        values = []
        for d in directions:
            try:
                values.append(assembly.energy(radius * d))
            except EnergyOverflowError:
                values.append(-np.inf)
        spheres.append(SphereSample(radius=float(radius), min_energy=float(min(values))))

    report = GeometryReport(verdict=Verdict.NOT_CERTIFIED, spheres=spheres)
    try:
        e = far if far is not None else far_point(assembly)
    except InvalidGeometryError as err:
        logger.warning(f"No far point for the mountain-pass geometry: {err}")
        return report
    report.far_point_norm = x_norm(e, field, V)
    report.far_point_energy = assembly.energy(e)
    passing = [
        sphere
        for sphere in spheres
        if sphere.min_energy >= constants.MP_DELTA0
        and report.far_point_norm > sphere.radius
        and report.far_point_energy < 0.0
    ]
    if passing:
        best = max(passing, key=lambda sphere: sphere.min_energy)
        report.verdict = Verdict.CERTIFIED
        report.radius = best.radius
        report.delta = best.min_energy
    logger.info(f"Mountain-pass geometry: {report.verdict.value} (r = {report.radius}, delta = {report.delta})")
    return report
