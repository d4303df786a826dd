"""Checks run on solver output: sign of the solution and Cerami telemetry."""

import logging
from typing import Optional

import numpy as np

from vexp_solver.grid_core import GridFunction
from vexp_solver.shared_libraries import constants
from vexp_solver.shared_libraries.types import CeramiVerdict, PositivityReport, SolverReport

logger = logging.getLogger(__name__)


def positivity_check(u: GridFunction) -> PositivityReport:
    """u > 0 at every interior node."""
    lowest = u.interior_min()
    return PositivityReport(positive=lowest > 0.0, min_interior=lowest)


def cerami_telemetry(
    report: SolverReport, bound_factor: float = constants.CERAMI_BOUND_FACTOR
) -> CeramiVerdict:
    """Norms of the selected iterates stay below B (1 + |u_first|).

    An iterate is selected when its energy lies in the band
    |phi(u_n)| <= B (1 + |phi_final|) and s_n does not exceed any earlier
    s_m. u_first is the first selected iterate.
    """
    norms = np.asarray(report.norms, dtype=float)
    if norms.size == 0:
        return CeramiVerdict(bounded=True, bound=float("inf"))
    selected = np.ones(norms.size, dtype=bool)
    energies = np.asarray(report.energies, dtype=float)
    if energies.size == norms.size:
        final_energy = report.final_energy if np.isfinite(report.final_energy) else float(energies[-1])
        selected &= np.abs(energies) <= bound_factor * (1.0 + abs(final_energy))
    cerami = np.asarray(report.cerami, dtype=float)
    if cerami.size == norms.size:
        selected &= cerami <= np.minimum.accumulate(cerami)
    chosen = np.flatnonzero(selected)
    if chosen.size == 0:
        return CeramiVerdict(bounded=True, bound=float("inf"))
    bound = bound_factor * (1.0 + float(norms[chosen[0]]))
    offending = chosen[norms[chosen] > bound]
    witness: Optional[int] = int(offending[0]) if offending.size else None
    if witness is not None:
        logger.warning(f"Cerami telemetry: |u_{witness}| = {norms[witness]:.6g} exceeds {bound:.6g}")
        return CeramiVerdict(
            bounded=False, bound=bound, witness_iteration=witness, witness_norm=float(norms[witness])
        )
    return CeramiVerdict(bounded=True, bound=bound)
