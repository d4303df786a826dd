"""Numerical mountain-pass solver.

The path from 0 to the far endpoint e is kept as P nodes gamma_0 = 0, ...,
gamma_{P-1} = e, joined by a cubic spline in the chord-length parameter
(chords measured in the constant-exponent X norm). The endpoints never move.
One outer iteration:

  (a) locate the path maximum: phi on the nodes, smallest-index argmax,
      refined on the spline by a root of t -> <phi'(gamma(t)), gamma'(t)>
      on the neighbouring bracket;
  (b) move the maximizer along d = -A^{-1} phi'(u), A the Gram matrix of
      the constant-exponent X inner product;
  (c) re-spline: the moved point replaces the nearest interior node, the
      spline is rebuilt over chord length and resampled at P points with
      the moved point kept as a node.

The Armijo test of (b) is applied to the maximum of the re-splined path, so
path maxima never increase. The run stops when the Cerami quantity
s_n = |phi'(u_n)|_inf (1 + ||u_n||) falls below tol.

With path = "ray" the path is instead the segment {s w : 0 <= s <= T}
re-fitted through the moved point and stretched until phi(T w) < 0; its far
end is not kept at e.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
from numpy.typing import NDArray
from scipy import optimize
from scipy.interpolate import CubicSpline

from vexp_solver.energy import EnergyAssembly
from vexp_solver.grid_core import GridFunction
from vexp_solver.mountain_pass.diagnostics import positivity_check
from vexp_solver.shared_libraries import constants
from vexp_solver.shared_libraries.errors import EnergyOverflowError, InvalidGeometryError
from vexp_solver.shared_libraries.types import SolverConfig, SolverReport
from vexp_solver.vexp_spaces import x_norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PathMaximum:
    """The maximizer of phi on a path, its energy and its path parameter."""

    point: GridFunction
    value: float
    position: float


def _refine(
    energy_at: Callable[[float], float],
    slope_at: Callable[[float], float],
    lo: float,
    hi: float,
) -> float:
    """Maximizer of a path energy on [lo, hi]: slope root when bracketed, else bounded search."""
    if slope_at(lo) > 0.0 > slope_at(hi):
        return float(optimize.brentq(slope_at, lo, hi, xtol=1e-14 * hi, rtol=1e-13))
    result = optimize.minimize_scalar(
        lambda value: -energy_at(value), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * hi}
    )
    return float(result.x)


@dataclass(frozen=True)
class SplinePath:
    """P nodes from 0 to e, interpolated by a cubic spline in chord length."""

    assembly: EnergyAssembly
    nodes: NDArray[np.float64]

    @classmethod
    def segment(cls, assembly: EnergyAssembly, e: GridFunction, points: int) -> SplinePath:
        """The straight path s -> s e sampled at P equispaced points."""
        return cls(assembly, np.outer(np.linspace(0.0, 1.0, points), e.values))

    @property
    def points(self) -> int:
        return self.nodes.shape[0]

    @property
    def start(self) -> GridFunction:
        return GridFunction(self.assembly.grid, self.nodes[0])

    @property
    def end(self) -> GridFunction:
        return GridFunction(self.assembly.grid, self.nodes[-1])

    @cached_property
    def parameters(self) -> NDArray[np.float64]:
        """Normalized cumulative chord length of the nodes."""
        return _chord_parameters(self.assembly, self.nodes)

    @cached_property
    def spline(self) -> CubicSpline:
        return CubicSpline(self.parameters, self.nodes, axis=0)

    def point(self, t: float) -> GridFunction:
        return GridFunction(self.assembly.grid, self.spline(t))

    def _energy(self, t: float) -> float:
        return self.assembly.energy(self.point(t))

    def _slope(self, t: float) -> float:
        tangent = GridFunction(self.assembly.grid, self.spline(t, 1))
        return self.assembly.directional_derivative(self.point(t), tangent)

    def locate_maximum(self) -> PathMaximum:
        """The path maximizer and its energy.

        Raises:
            InvalidGeometryError: the largest node energy sits at an endpoint.
        """
        grid = self.assembly.grid
        energies = np.array([self.assembly.energy(GridFunction(grid, row)) for row in self.nodes])
        k = int(np.argmax(energies))
        if k == 0 or k == self.points - 1:
            raise InvalidGeometryError(f"path maximum at endpoint index {k}")
        t = self.parameters
        best = _refine(self._energy, self._slope, float(t[k - 1]), float(t[k + 1]))
        u = self.point(best)
        value = self.assembly.energy(u)
        if value < energies[k]:
            return PathMaximum(GridFunction(grid, self.nodes[k]), float(energies[k]), float(t[k]))
        return PathMaximum(u, value, best)

    def deformed(self, maximum: PathMaximum, moved: GridFunction) -> Optional[SplinePath]:
        """The re-splined path through moved in place of the node nearest the maximizer.

        Returns None when moved coincides with a neighbouring node.
        """
        t = self.parameters
        j = int(np.clip(np.argmin(np.abs(t - maximum.position)), 1, self.points - 2))
        nodes = self.nodes.copy()
        nodes[j] = moved.values
        chords = _chord_lengths(self.assembly, nodes)
        if not np.all(chords > 0.0):
            return None
        t = _chord_parameters(self.assembly, nodes, chords)
        pinned = float(t[j])
        m = int(np.clip(round(pinned * (self.points - 1)), 1, self.points - 2))
        samples = np.concatenate(
            [np.linspace(0.0, pinned, m + 1), np.linspace(pinned, 1.0, self.points - m)[1:]]
        )
        resampled = CubicSpline(t, nodes, axis=0)(samples)
        resampled[0] = self.nodes[0]
        resampled[m] = moved.values
        resampled[-1] = self.nodes[-1]
        if not np.all(_chord_lengths(self.assembly, resampled) > 0.0):
            return None
        return SplinePath(self.assembly, resampled)


def _chord_lengths(assembly: EnergyAssembly, nodes: NDArray[np.float64]) -> NDArray[np.float64]:
    """X-norm length of each chord gamma_{i+1} - gamma_i."""
    chords = np.diff(nodes, axis=0)[:, assembly.grid.interior_indices]
    return np.sqrt(np.einsum("ij,ji->i", chords, assembly.gram_matrix @ chords.T))


def _chord_parameters(
    assembly: EnergyAssembly,
    nodes: NDArray[np.float64],
    chords: Optional[NDArray[np.float64]] = None,
) -> NDArray[np.float64]:
    chords = _chord_lengths(assembly, nodes) if chords is None else chords
    cumulative = np.concatenate([[0.0], np.cumsum(chords)])
    return cumulative / cumulative[-1]


@dataclass(frozen=True)
class RayPath:
    """The segment s -> s * direction, s in [0, scale], with phi < 0 at its end."""

    assembly: EnergyAssembly
    direction: GridFunction
    scale: float
    points: int = constants.PATH_POINTS

    @classmethod
    def through(
        cls,
        assembly: EnergyAssembly,
        direction: GridFunction,
        start: float = 2.0,
        points: int = constants.PATH_POINTS,
    ) -> Optional[RayPath]:
        """Stretch the ray through direction until its endpoint has negative energy."""
        scale = start
        for _ in range(constants.ENDPOINT_DOUBLINGS):
            try:
                if assembly.energy(scale * direction) < 0.0:
                    return cls(assembly, direction, scale, points)
            except EnergyOverflowError:
                return None
            scale *= 2.0
        return None

    def _energy(self, s: float) -> float:
        return self.assembly.energy(s * self.direction)

    def _slope(self, s: float) -> float:
        return self.assembly.directional_derivative(s * self.direction, self.direction)

    def locate_maximum(self) -> PathMaximum:
        """The path maximizer and its energy.

        Raises:
            InvalidGeometryError: the sampled maximum sits at an endpoint.
        """
        s = np.linspace(0.0, self.scale, self.points)
        energies = np.array([self._energy(value) for value in s])
        k = int(np.argmax(energies))
        if k == 0 or k == self.points - 1:
            raise InvalidGeometryError(f"path maximum at endpoint index {k}")
        best = _refine(self._energy, self._slope, float(s[k - 1]), float(s[k + 1]))
        u = best * self.direction
        value = self.assembly.energy(u)
        if value < energies[k]:
            return PathMaximum(s[k] * self.direction, float(energies[k]), float(s[k]))
        return PathMaximum(u, value, best)

    def deformed(self, maximum: PathMaximum, moved: GridFunction) -> Optional[RayPath]:
        """The ray through moved, stretched until its end has negative energy."""
        if moved.is_zero:
            return None
        return RayPath.through(self.assembly, moved, points=self.points)


Path = Union[SplinePath, RayPath]


def _log_pairing(assembly: EnergyAssembly, g: GridFunction, u: GridFunction) -> float:
    test = GridFunction(assembly.grid, u.values / np.log(np.e + np.abs(u.values)))
    return assembly.pairing(g, test)


def initial_path(assembly: EnergyAssembly, e: GridFunction, config: SolverConfig) -> Path:
    if config.path == "ray":
        return RayPath(assembly, e, 1.0, config.path_points)
    return SplinePath.segment(assembly, e, config.path_points)


def mountain_pass_solve(
    assembly: EnergyAssembly,
    e: GridFunction,
    config: Optional[SolverConfig] = None,
) -> SolverReport:
    """Minimax critical point on the paths from 0 to e.

    Raises:
        InvalidGeometryError: e = 0, phi(e) >= 0, or the initial path
            maximum sits at an endpoint.
    """
    config = config or SolverConfig(variant=assembly.variant)
    if e.is_zero:
        raise InvalidGeometryError("the far endpoint e must be nonzero")
    phi_e = assembly.energy(e)
    if not phi_e < 0.0:
        raise InvalidGeometryError(f"phi(e) = {phi_e:.6g} must be negative")

    field = assembly.exponents
    V = assembly.potential
    report = SolverReport(variant=assembly.variant)
    path = initial_path(assembly, e, config)
    peak = path.locate_maximum()
    u, phi_u = peak.point, peak.value
    logger.info(f"Mountain pass ({assembly.variant}, {config.path} path): initial path maximum {phi_u:.10g}")

    step_taken = 0.0
    for iteration in range(config.max_iterations + 1):
        g = assembly.gradient(u)
        residual = float(np.abs(g.values).max())
        norm = x_norm(u, field, V)
        cerami = residual * (1.0 + norm)
        report.energies.append(phi_u)
        report.cerami.append(cerami)
        report.norms.append(norm)
        report.log_pairings.append(_log_pairing(assembly, g, u))
        report.steps.append(step_taken)
        report.iterations = iteration
        if iteration % constants.LOG_EVERY == 0:
            logger.info(f"iter {iteration}: phi = {phi_u:.12g}, s_n = {cerami:.3e}, |u| = {norm:.6g}")
        if cerami < config.tol:
            report.converged = True
            report.message = "converged"
            break
        if iteration == config.max_iterations:
            report.message = f"iteration cap {config.max_iterations} reached"
            break

        direction = -assembly.riesz(g)
        slope = assembly.pairing(g, direction)
        step = constants.ARMIJO_INITIAL_STEP
        accepted: Optional[tuple[Path, PathMaximum]] = None
        for _ in range(constants.ARMIJO_MAX_BACKTRACKS):
            candidate = path.deformed(peak, u + step * direction)
            if candidate is not None:
                try:
                    moved: Optional[PathMaximum] = candidate.locate_maximum()
                except (InvalidGeometryError, EnergyOverflowError):
                    moved = None
                if moved is not None and moved.value <= phi_u + constants.ARMIJO_C1 * step * slope:
                    accepted = (candidate, moved)
                    break
            step *= constants.ARMIJO_SHRINK
        if accepted is None:
            report.message = "line search failed to decrease the path maximum"
            logger.warning(f"iter {iteration}: {report.message} (s_n = {cerami:.3e})")
            break
        path, peak = accepted
        u, phi_u = peak.point, peak.value
        step_taken = step

    report.final_residual = report.cerami[-1] / (1.0 + report.norms[-1])
    report.final_energy = phi_u
    report.final_norm = report.norms[-1]
    report.profile = u.values.tolist()
    if assembly.variant == "plus":
        report.positivity = positivity_check(u)
    elif assembly.variant == "minus":
        report.positivity = positivity_check(-u)
    logger.info(
        f"Mountain pass ({assembly.variant}) {report.message} after {report.iterations} iterations: "
        f"phi = {phi_u:.12g}, |phi'|_inf = {report.final_residual:.3e}"
    )
    return report
