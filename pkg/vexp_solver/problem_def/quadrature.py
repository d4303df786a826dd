"""Primitive F(x, t) = int_0^t f(x, s) ds by adaptive composite Simpson.

Every entry t_i is mapped to [0, 1] through s = t_i * tau^4, so one tau grid
serves all entries at once and the |s|^{p-1} behaviour at s = 0 becomes a
smooth power of tau. The panel count doubles until the Richardson estimate
|S_2m - S_m| / 15 meets atol + rtol |S_2m| for every entry; entries that
converge early drop out of the refinement.
"""

import logging
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vexp_solver.shared_libraries import constants

logger = logging.getLogger(__name__)

# integrand(rows, s) evaluates f(x_rows, s) for s of shape (len(rows), K)
RowIntegrand = Callable[[NDArray[np.intp], NDArray[np.float64]], NDArray[np.float64]]

_SUBSTITUTION_POWER = 4
# cap on the size of one (rows, nodes) evaluation block
_BLOCK_ELEMENTS = 1 << 22


def _simpson_weights(panels: int) -> NDArray[np.float64]:
    weights = np.ones(2 * panels + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return weights / (6.0 * panels)


def _simpson(
    integrand: RowIntegrand, rows: NDArray[np.intp], upper: NDArray[np.float64], panels: int
) -> NDArray[np.float64]:
    tau = np.linspace(0.0, 1.0, 2 * panels + 1)
    sigma = tau**_SUBSTITUTION_POWER
    weights = _simpson_weights(panels) * _SUBSTITUTION_POWER * tau ** (_SUBSTITUTION_POWER - 1)
    block = max(1, _BLOCK_ELEMENTS // tau.size)
    out = np.empty(rows.size)
    for start in range(0, rows.size, block):
        stop = start + block
        samples = integrand(rows[start:stop], upper[start:stop, None] * sigma[None, :])
        out[start:stop] = upper[start:stop] * (samples @ weights)
    return out


def simpson_primitive(
    integrand: RowIntegrand,
    upper: ArrayLike,
    atol: float = constants.SIMPSON_ATOL,
    rtol: float = constants.SIMPSON_RTOL,
) -> NDArray[np.float64]:
    """int_0^{t_i} integrand(i, s) ds for every entry t_i of upper."""
    upper = np.asarray(upper, dtype=float).reshape(-1)
    result = np.zeros_like(upper)
    active = np.flatnonzero(upper != 0.0)
    if active.size == 0:
        return result
    panels = constants.SIMPSON_START_PANELS
    coarse = _simpson(integrand, active, upper[active], panels)
    while active.size:
        panels *= 2
        fine = _simpson(integrand, active, upper[active], panels)
        error = np.abs(fine - coarse) / 15.0
        converged = error <= atol + rtol * np.abs(fine)
        done = converged | ~np.isfinite(fine)
        if panels >= constants.SIMPSON_MAX_PANELS:
            if not np.all(done):
                logger.warning(
                    f"Simpson primitive stopped at {panels} panels with error {error[~done].max():.3g}"
                )
            done[:] = True
        with np.errstate(invalid="ignore"):
            corrected = np.where(np.isfinite(fine), fine + (fine - coarse) / 15.0, fine)
        result[active[done]] = corrected[done]
        active = active[~done]
        coarse = fine[~done]
    return result
