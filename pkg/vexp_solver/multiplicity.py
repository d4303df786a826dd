"""Desk-scale premises of the symmetric multiplicity argument.

Z_k is modelled by the tail span{e_k, ..., e_n} of the eigenbasis of the
discrete Dirichlet problem K e = lambda M e on the interior nodes. beta_k is
the largest ratio |u|_alpha / ||u|| over Z_k, found by projected gradient
ascent in eigen-coordinates.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from vexp_solver import config
from vexp_solver.energy import EnergyAssembly
from vexp_solver.grid_core import Grid, GridFunction
from vexp_solver.mountain_pass.geometry import ConeTestFunction
from vexp_solver.shared_libraries import constants
from vexp_solver.shared_libraries.errors import CapacityError, DomainError, EnergyOverflowError
from vexp_solver.shared_libraries.types import (
    A1Report,
    A1Row,
    A2Report,
    BetaRow,
    IndexBookkeeping,
    SphereSample,
    Verdict,
)
from vexp_solver.vexp_spaces import (
    ExponentField,
    luxemburg_gradient,
    luxemburg_norm,
    x_norm,
    x_norm_gradient,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiscreteBasis:
    """M-orthonormal Dirichlet eigenvectors, ascending eigenvalue, embedded on all nodes."""

    grid: Grid
    eigenvalues: NDArray[np.float64]
    vectors: NDArray[np.float64]

    @classmethod
    def build(cls, grid: Grid) -> DiscreteBasis:
        interior = grid.interior_indices
        stiffness = grid.stiffness_matrix[interior][:, interior].toarray()
        mass = np.diag(grid.weights[interior])
        eigenvalues, vectors = linalg.eigh(stiffness, mass)
        full = np.zeros((grid.size, interior.size))
        full[interior] = vectors
        return cls(grid, eigenvalues, full)

    @property
    def dimension(self) -> int:
        return self.eigenvalues.size

    def _check_k(self, k: int) -> None:
        if not 1 <= k <= self.dimension:
            raise DomainError(f"k = {k} outside 1..{self.dimension}")

    def head(self, k: int) -> NDArray[np.float64]:
        """Columns spanning Y_k = span{e_1..e_k}."""
        self._check_k(k)
        return self.vectors[:, :k]

    def tail(self, k: int) -> NDArray[np.float64]:
        """Columns spanning Z_k = span{e_k..e_n}."""
        self._check_k(k)
        return self.vectors[:, k - 1 :]

    def coordinates(self, u: ArrayLike, k: int) -> NDArray[np.float64]:
        """Coefficients of u in the Z_k columns (exact for u in Z_k)."""
        values = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)
        return self.tail(k).T @ (self.grid.weights * values)


def _quotient(
    E: NDArray[np.float64], c: NDArray[np.float64], field: ExponentField, V: NDArray[np.float64]
) -> tuple[float, GridFunction, float]:
    u = GridFunction(field.grid, E @ c)
    norm = x_norm(u, field, V)
    return luxemburg_norm(u, field.alpha) / norm, u, norm


def _ascend(
    E: NDArray[np.float64],
    start: NDArray[np.float64],
    field: ExponentField,
    V: NDArray[np.float64],
    steps: int,
) -> tuple[float, NDArray[np.float64]]:
    """Projected gradient ascent of |Ec|_alpha / ||Ec|| on the unit X-sphere."""
    q, u, norm = _quotient(E, start, field, V)
    c = start / norm
    u = u / norm
    step = 1.0
    for _ in range(steps):
        grad = (E.T @ luxemburg_gradient(u, field.alpha) - q * (E.T @ x_norm_gradient(u, field, V)))
        size = float(grad @ grad)
        if size <= (1e-12 * q) ** 2:
            break
        improved = False
        for _ in range(30):
            trial_q, trial_u, trial_norm = _quotient(E, c + step * grad, field, V)
            if trial_q >= q + constants.ARMIJO_C1 * step * size:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        gain = trial_q - q
        c = (c + step * grad) / trial_norm
        u = trial_u / trial_norm
        q = trial_q
        step = min(2.0 * step, 1e3)
        if gain <= 1e-13 * q:
            break
    return q, u.values.copy()


def _beta_with_maximizer(
    basis: DiscreteBasis,
    k: int,
    field: ExponentField,
    V: ArrayLike,
    restarts: int,
    seed: int,
    warm: Optional[NDArray[np.float64]] = None,
    steps: int = constants.BETA_ASCENT_STEPS,
    workers: Optional[int] = None,
) -> tuple[float, NDArray[np.float64]]:
    E = basis.tail(k)
    V = np.broadcast_to(np.asarray(V, dtype=float), (basis.grid.size,))
    leading = np.zeros(E.shape[1])
    leading[0] = 1.0
    starts = [leading]
    if warm is not None and np.any(warm):
        starts.append(basis.coordinates(warm, k))
    for restart in range(1, restarts):
        rng = np.random.default_rng([seed, k, restart])
        starts.append(rng.standard_normal(E.shape[1]))
    with ThreadPoolExecutor(max_workers=config.worker_count(workers)) as executor:
        results = list(executor.map(lambda start: _ascend(E, start, field, V, steps), starts))
    best = max(range(len(results)), key=lambda i: results[i][0])
    return results[best]


def beta_k(
    basis: DiscreteBasis,
    k: int,
    field: ExponentField,
    V: ArrayLike,
    restarts: int = 4,
    seed: int = 0,
) -> float:
    """Approximate sup{|u|_alpha : ||u|| = 1, u in Z_k}.

    Raises:
        DomainError: k outside 1..n.
    """
    value, _ = _beta_with_maximizer(basis, k, field, V, restarts, seed)
    return float(value)


def beta_sequence(
    basis: DiscreteBasis,
    ks: Sequence[int],
    field: ExponentField,
    V: ArrayLike,
    restarts: int = 4,
    seed: int = 0,
    steps: int = constants.BETA_ASCENT_STEPS,
) -> list[BetaRow]:
    """beta_k for every k, largest k first, each ascent warm-started from the previous maximizer.

    Z_{k'} sits inside Z_k for k' > k, so the warm start makes the sequence
    non-increasing in k.
    """
    values: dict[int, float] = {}
    warm: Optional[NDArray[np.float64]] = None
    for k in sorted(set(ks), reverse=True):
        value, warm = _beta_with_maximizer(basis, k, field, V, restarts, seed, warm=warm, steps=steps)
        values[k] = float(value)
        logger.debug(f"beta_{k} = {value:.12g}")
    return [BetaRow(k=k, beta=values[k]) for k in sorted(values)]


@dataclass(frozen=True)
class ConeFamily:
    """k cone bumps with pairwise disjoint supports."""

    centers: NDArray[np.float64]
    radii: NDArray[np.float64]
    cones: tuple[ConeTestFunction, ...]

    @property
    def size(self) -> int:
        return len(self.cones)

    def overlaps(self) -> bool:
        """True when some node lies in two supports."""
        counts = np.sum([cone.support for cone in self.cones], axis=0)
        return bool(np.any(counts > 1))

    @property
    def matrix(self) -> NDArray[np.float64]:
        """Nodal values of the cones as columns, shape (size, k)."""
        return np.stack([cone.values.values for cone in self.cones], axis=1)

    @property
    def dimension(self) -> int:
        """Dimension of span{h_1..h_k}: the rank of the cone matrix."""
        return int(np.linalg.matrix_rank(self.matrix))

    def combine(self, coefficients: ArrayLike) -> GridFunction:
        coefficients = np.asarray(coefficients, dtype=float)
        values = sum(c * cone.values.values for c, cone in zip(coefficients, self.cones))
        return GridFunction(self.cones[0].values.grid, values)


def build_cone_family(grid: Grid, k: int) -> ConeFamily:
    """k equal slots along the first axis, each holding a cone of radius slot/2 - h.

    Raises:
        CapacityError: a radius would drop below MIN_CONE_CELLS cells.
    """
    if k < 1:
        raise DomainError(f"need at least one cone, got k = {k}")
    h = grid.spacing
    width = grid.upper - grid.lower
    feasible = int(np.floor(width / (2.0 * (constants.MIN_CONE_CELLS + 1) * h) + 1e-9))
    slot = width / k
    radius = 0.5 * slot - h
    if radius < constants.MIN_CONE_CELLS * h * (1.0 - 1e-9):
        raise CapacityError(k, feasible)
    middle = 0.5 * (grid.lower + grid.upper)
    centers = np.full((k, grid.dimension), middle)
    centers[:, 0] = grid.lower + (np.arange(k) + 0.5) * slot
    cones = tuple(ConeTestFunction.build(grid, center, radius) for center in centers)
    return ConeFamily(centers, np.full(k, radius), cones)


def _bookkeeping(basis: DiscreteBasis, k: int, dim_minus: int) -> IndexBookkeeping:
    """codim Z_k from the columns left out of the tail, against dim V-."""
    codim_plus = basis.dimension - basis.tail(k).shape[1]
    return IndexBookkeeping(codim_plus=codim_plus, dim_minus=dim_minus, consistent=codim_plus + 1 == dim_minus)


def verify_A2(
    assembly: EnergyAssembly,
    family: ConeFamily,
    rhos: Sequence[float],
    samples: int,
    seed: int = 0,
    basis: Optional[DiscreteBasis] = None,
) -> A2Report:
    """phi <= 0 on the sampled rho-sphere of span{h_1..h_k}; smallest passing rho is reported.

    The bookkeeping pairs span{h_1..h_k} with Z_k of basis (built on the
    assembly grid when not given).
    """
    field = assembly.exponents
    V = assembly.potential
    spheres: list[SphereSample] = []
    certified_at: Optional[float] = None
    for rho in sorted(rhos):
        rng = np.random.default_rng([seed, family.size])
        energies = []
        for _ in range(samples):
            u = family.combine(rng.standard_normal(family.size))
            u = rho * u / x_norm(u, field, V)
            try:
                energies.append(assembly.energy(u))
            except EnergyOverflowError:
                energies.append(float("nan"))
        values = np.asarray(energies)
        spheres.append(
            SphereSample(radius=float(rho), min_energy=float(np.min(values)), max_energy=float(np.max(values)))
        )
        if certified_at is None and np.all(values <= 0.0):
            certified_at = float(rho)
    verdict = Verdict.CERTIFIED if certified_at is not None else Verdict.NOT_CERTIFIED
    logger.info(f"(A2) with k = {family.size}: {verdict.value} (rho = {certified_at})")
    if basis is None:
        basis = DiscreteBasis.build(assembly.grid)
    bookkeeping = _bookkeeping(basis, family.size, family.dimension)
    if not bookkeeping.consistent:
        logger.warning(
            f"(A2) bookkeeping: codim Z_k + 1 = {bookkeeping.codim_plus + 1} but dim V- = {bookkeeping.dim_minus}"
        )
    return A2Report(verdict=verdict, radius=certified_at, spheres=spheres, bookkeeping=bookkeeping)


def fit_c_sigma(assembly: EnergyAssembly, sigma: float, max_points: int = 64) -> float:
    """Smallest sampled C with F <= sigma |t|^p + C |t|^alpha, floored at 1e-8."""
    grid = assembly.grid
    interior = grid.interior_indices
    stride = max(1, interior.size // max_points)
    x = grid.coordinates[interior[::stride]]
    t = np.geomspace(1e-3, 1e3, 61)
    t = np.concatenate([t, -t])
    X = np.repeat(x, t.size, axis=0)
    T = np.tile(t, x.shape[0])
    instance = assembly.instance
    magnitude = np.abs(T)
    with np.errstate(over="ignore", invalid="ignore"):
        excess = (instance.F(X, T) - sigma * magnitude ** instance.p(X)) / magnitude ** instance.alpha(X)
    return max(float(np.nanmax(excess)), 1e-8)


def verify_A1_proxy(
    basis: DiscreteBasis,
    assembly: EnergyAssembly,
    ks: Sequence[int],
    restarts: int = 4,
    samples: int = 16,
    seed: int = 0,
    betas: Optional[Sequence[BetaRow]] = None,
) -> A1Report:
    """Sampled min of phi on the gamma_k-sphere of Z_k, expected to increase with k.

    gamma_k = (2 C(sigma) alpha+ beta_k^{alpha+})^{1/(p- - alpha+)} with
    sigma = V0 / 8.
    """
    field = assembly.exponents
    V = assembly.potential
    p_minus, alpha_plus = field.p_minus, field.alpha_plus
    if alpha_plus <= p_minus:
        logger.info(f"(A1) inapplicable: alpha+ = {alpha_plus:.6g} <= p- = {p_minus:.6g}")
        return A1Report(verdict=Verdict.INAPPLICABLE)
    sigma = float(V[basis.grid.interior_mask].min()) / 8.0
    c_sigma = fit_c_sigma(assembly, sigma)
    rows: list[A1Row] = []
    if betas is None:
        betas = beta_sequence(basis, ks, field, V, restarts, seed)
    for row in betas:
        k, beta = row.k, row.beta
        gamma = (2.0 * c_sigma * alpha_plus * beta**alpha_plus) ** (1.0 / (p_minus - alpha_plus))
        E = basis.tail(k)
        rng = np.random.default_rng([seed, k])
        energies = []
        for _ in range(samples):
            u = GridFunction(basis.grid, E @ rng.standard_normal(E.shape[1]))
            u = gamma * u / x_norm(u, field, V)
            try:
                energies.append(assembly.energy(u))
            except EnergyOverflowError:
                energies.append(float("nan"))
        rows.append(A1Row(k=k, beta=beta, gamma=float(gamma), min_energy=float(np.min(energies))))
    minima = np.array([row.min_energy for row in rows])
    increasing = minima.size > 0 and bool(np.all(np.diff(minima) > 0.0))
    verdict = Verdict.CERTIFIED if increasing else Verdict.NOT_CERTIFIED
    logger.info(f"(A1) proxy over k = {[row.k for row in rows]}: {verdict.value}")
    return A1Report(
        verdict=verdict,
        c_sigma=c_sigma,
        rows=rows,
        bookkeeping=[
            _bookkeeping(basis, row.k, int(np.linalg.matrix_rank(basis.head(row.k)))) for row in rows
        ],
    )
