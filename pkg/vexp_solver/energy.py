"""Discrete energy functional and its exact gradient.

    phi(u) = h^N sum_c |grad u|_c^{p_c} / p_c
           + sum_i w_i V_i |u_i|^{p_i} / p_i
           - sum_i w_i F(x_i, u_i)

The gradient is the derivative of exactly this sum with respect to the
interior nodal values; the only modification is |grad u| -> (|grad u|^2 +
eps^2)^{1/2} in the flux, which removes the singularity of p < 2.

Variants: "plus" replaces f by f+ (zero for t < 0) and F by F(x, max(t, 0));
"minus" is the mirror; "full" uses f itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from vexp_solver.grid_core import Grid, GridFunction, cell_gradient
from vexp_solver.problem_def.instances import ProblemInstance
from vexp_solver.problem_def.nonlinearities import BoundNonlinearity
from vexp_solver.shared_libraries import constants
from vexp_solver.shared_libraries.errors import DomainError, EnergyOverflowError
from vexp_solver.vexp_spaces import ExponentField

logger = logging.getLogger(__name__)

Variant = Literal["full", "plus", "minus"]


@dataclass
class EvaluationCounter:
    energy: int = 0
    gradient: int = 0


@dataclass(frozen=True)
class EnergyAssembly:
    """phi and phi' for one instance on one grid."""

    instance: ProblemInstance
    grid: Grid
    variant: Variant = "full"
    counter: EvaluationCounter = field(default_factory=EvaluationCounter, compare=False)

    def __post_init__(self) -> None:
        if self.variant not in ("full", "plus", "minus"):
            raise DomainError(f"unknown variant {self.variant!r}")

    @cached_property
    def exponents(self) -> ExponentField:
        # the energy needs p only; alpha and a are validated by the hypothesis checks
        return self.instance.exponent_field(self.grid, strict=False)

    @cached_property
    def potential(self) -> NDArray[np.float64]:
        V = self.instance.V(self.grid.coordinates)
        V.setflags(write=False)
        return V

    @cached_property
    def nonlinearity(self) -> BoundNonlinearity:
        return self.instance.bind(self.grid.coordinates)

    @cached_property
    def mass_weights(self) -> NDArray[np.float64]:
        """w_i V_i: the nodal weights of the potential term."""
        return self.grid.weights * self.potential

    def with_variant(self, variant: Variant) -> EnergyAssembly:
        return EnergyAssembly(self.instance, self.grid, variant)

    def _check(self, u: GridFunction) -> None:
        if u.grid != self.grid:
            raise DomainError("grid function lives on a different grid")
        if not u.has_zero_trace:
            raise DomainError("energy needs a zero boundary trace")

    def _truncated(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.variant == "plus":
            return np.maximum(values, 0.0)
        if self.variant == "minus":
            return np.minimum(values, 0.0)
        return values

    def _primitive(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        t = self._truncated(values)
        out = np.zeros_like(t)
        active = np.flatnonzero(t)
        if active.size:
            out[active] = self.nonlinearity.subset(active).primitive(t[active])
        return out

    def _source(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        t = self._truncated(values)
        out = np.zeros_like(t)
        active = np.flatnonzero(t)
        if active.size:
            out[active] = self.nonlinearity.subset(active).value(t[active])
        return out

    def _principal(self, u: GridFunction) -> float:
        p = self.exponents.p
        slope = np.linalg.norm(cell_gradient(u), axis=1)
        cell_p = self.exponents.cell_p
        with np.errstate(over="ignore", invalid="ignore"):
            gradient_part = self.grid.cell_volume * np.sum(slope**cell_p / cell_p)
            potential_part = np.dot(self.mass_weights / p, np.abs(u.values) ** p)
        return float(gradient_part + potential_part)

    def energy(self, u: GridFunction) -> float:
        """phi(u) for the assembly's variant."""
        self._check(u)
        self.counter.energy += 1
        principal = self._principal(u)
        with np.errstate(over="ignore", invalid="ignore"):
            source = float(np.dot(self.grid.weights, self._primitive(u.values)))
            total = principal - source
        if not np.isfinite(total):
            raise EnergyOverflowError(
                f"energy overflowed (principal {principal:.3g}, source {source:.3g}); "
                "use a smaller scale t or a finer grid"
            )
        return total

    def principal_energy(self, u: GridFunction) -> float:
        """The f-free part int (|grad u|^p + V |u|^p) / p."""
        self._check(u)
        return self._principal(u)

    def operator(self, u: GridFunction) -> NDArray[np.float64]:
        """Nodal values of L(u): the gradient of the f-free part."""
        G = cell_gradient(u)
        cell_p = self.exponents.cell_p
        regularized = np.sqrt(np.sum(G**2, axis=1) + constants.GRADIENT_EPS**2)
        with np.errstate(over="ignore", invalid="ignore"):
            flux_scale = self.grid.cell_volume * regularized ** (cell_p - 2.0)
            out = sum(D.T @ (flux_scale * G[:, k]) for k, D in enumerate(self.grid.difference_operators))
            out = out + self.mass_weights * np.sign(u.values) * np.abs(u.values) ** (self.exponents.p - 1.0)
        out[self.grid.boundary_mask] = 0.0
        return out

    def gradient(self, u: GridFunction) -> GridFunction:
        """Exact partial derivatives of phi in the interior nodal values."""
        self._check(u)
        self.counter.gradient += 1
        with np.errstate(over="ignore", invalid="ignore"):
            values = self.operator(u) - self.grid.weights * self._source(u.values)
        values[self.grid.boundary_mask] = 0.0
        if not np.all(np.isfinite(values)):
            raise EnergyOverflowError("gradient overflowed; use a smaller scale t or a finer grid")
        return GridFunction(self.grid, values)

    def pairing(self, w: GridFunction, v: GridFunction) -> float:
        """<w, v> = sum over interior nodes of w_i v_i.

        With w = gradient(u) this is the directional derivative of phi at u
        along v.
        """
        interior = self.grid.interior_mask
        return float(np.dot(w.values[interior], v.values[interior]))

    def directional_derivative(self, u: GridFunction, v: GridFunction) -> float:
        return self.pairing(self.gradient(u), v)

    def monotonicity_check(self, u: GridFunction, v: GridFunction) -> float:
        """<L(u) - L(v), u - v>; positive for u != v."""
        self._check(u)
        self._check(v)
        difference = GridFunction(self.grid, self.operator(u) - self.operator(v))
        return self.pairing(difference, u - v)

    def evenness_defect(self, u: GridFunction) -> float:
        """|phi(-u) - phi(u)|; zero up to rounding when f is odd."""
        return abs(self.energy(-u) - self.energy(u))

    @cached_property
    def gram_matrix(self) -> sparse.csc_matrix:
        """Interior block of K + diag(w V): the constant-exponent X inner product."""
        interior = self.grid.interior_indices
        full = self.grid.stiffness_matrix + sparse.diags(self.mass_weights)
        return full[interior][:, interior].tocsc()

    @cached_property
    def _gram_solver(self):
        return sparse_linalg.factorized(self.gram_matrix)

    def riesz(self, g: GridFunction) -> GridFunction:
        """Riesz representative of a gradient in the gram inner product."""
        values = np.zeros(self.grid.size)
        interior = self.grid.interior_indices
        values[interior] = self._gram_solver(np.ascontiguousarray(g.values[interior]))
        return GridFunction(self.grid, values)
