"""Truncation-radius study of the solution tails."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from vexp_solver import config
from vexp_solver.energy import EnergyAssembly, Variant
from vexp_solver.grid_core import Grid, GridFunction, cell_gradient
from vexp_solver.mountain_pass.geometry import far_point
from vexp_solver.mountain_pass.solver import mountain_pass_solve
from vexp_solver.problem_def.instances import ProblemInstance
from vexp_solver.shared_libraries import constants
from vexp_solver.shared_libraries.errors import VexpError
from vexp_solver.shared_libraries.types import DecayRow, DecayTable, SolverConfig, Verdict

logger = logging.getLogger(__name__)


def tail_metrics(u: GridFunction, half_width: Optional[float] = None) -> tuple[float, float]:
    """max |u| over nodes and max |grad u| over cells with |x| >= R/2."""
    grid = u.grid
    R = grid.half_width if half_width is None else half_width
    nodes = grid.radius >= 0.5 * R
    cells = np.linalg.norm(grid.cell_centers, axis=1) >= 0.5 * R
    slope = np.linalg.norm(cell_gradient(u), axis=1)
    tail_u = float(np.abs(u.values[nodes]).max(initial=0.0))
    tail_grad = float(slope[cells].max(initial=0.0))
    return tail_u, tail_grad


def _solve_radius(
    instance: ProblemInstance,
    dimension: int,
    radius: float,
    spacing: float,
    solver: SolverConfig,
    variant: Variant,
) -> DecayRow:
    grid = Grid.with_spacing(dimension, radius, spacing)
    assembly = EnergyAssembly(instance, grid, variant)
    try:
        e = far_point(assembly, radius=solver.cone_radius)
        report = mountain_pass_solve(assembly, e, solver)
    except VexpError as err:
        logger.warning(f"Decay study: R = {radius:g} failed: {err}")
        return DecayRow(half_width=radius, tail_max_u=float("nan"), tail_max_gradu=float("nan"), converged=False)
    u = GridFunction(grid, report.profile)
    tail_u, tail_grad = tail_metrics(u, radius)
    if not report.converged:
        logger.warning(f"Decay study: R = {radius:g} did not converge ({report.message})")
    return DecayRow(half_width=radius, tail_max_u=tail_u, tail_max_gradu=tail_grad, converged=report.converged)


def _strictly_decreasing(values: Sequence[float]) -> bool:
    return bool(np.all(np.diff(np.asarray(values, dtype=float)) < 0.0))


def summarize(rows: Sequence[DecayRow]) -> Verdict:
    """Certified when every row converged and both tails fall strictly to below the threshold."""
    if not rows or not all(row.converged for row in rows):
        return Verdict.NOT_CERTIFIED
    tails_u = [row.tail_max_u for row in rows]
    tails_grad = [row.tail_max_gradu for row in rows]
    final_small = tails_u[-1] < constants.DECAY_THRESHOLD and tails_grad[-1] < constants.DECAY_THRESHOLD
    trivial = all(value == 0.0 for value in tails_u + tails_grad)
    if trivial or (_strictly_decreasing(tails_u) and _strictly_decreasing(tails_grad) and final_small):
        return Verdict.CERTIFIED
    return Verdict.NOT_CERTIFIED


def decay_study(
    instance: ProblemInstance,
    radii: Sequence[float],
    spacing: float,
    solver: Optional[SolverConfig] = None,
    dimension: int = 1,
    variant: Variant = "plus",
    workers: Optional[int] = None,
) -> DecayTable:
    """Re-solve on [-R, R]^N for each R at fixed spacing and compare the tails."""
    solver = solver or SolverConfig(variant=variant)
    ordered = sorted(float(radius) for radius in radii)
    with ThreadPoolExecutor(max_workers=config.worker_count(workers)) as executor:
        rows = list(
            executor.map(
                lambda radius: _solve_radius(instance, dimension, radius, spacing, solver, variant),
                ordered,
            )
        )
    table = DecayTable(verdict=summarize(rows), rows=rows)
    logger.info(f"Decay study over R = {ordered}: {table.verdict.value}")
    return table
