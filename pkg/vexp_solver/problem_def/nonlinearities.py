"""Nonlinearities f(x, t) together with their primitives F(x, t).

A nonlinearity is evaluated in two stages: coefficients(x) samples the
x-dependent data (exponents, scales) once per point set, and the bound
evaluator then works on t arrays of shape (m,) or (m, K) against those m
points. Closed-form primitives are used when the class provides one;
otherwise F is computed by the adaptive Simpson rule in quadrature.py.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vexp_solver.problem_def.quadrature import simpson_primitive

logger = logging.getLogger(__name__)

Coefficients = dict[str, NDArray[np.float64]]
PointFunction = Callable[[NDArray[np.float64]], ArrayLike]
ExponentLike = Union[float, PointFunction]


def _sample(value: ExponentLike, x: NDArray[np.float64]) -> NDArray[np.float64]:
    if callable(value):
        return np.broadcast_to(np.asarray(value(x), dtype=float), (x.shape[0],)).copy()
    return np.full(x.shape[0], float(value))


def _column(coefficients: Coefficients, ndim: int) -> Coefficients:
    """Reshape per-point coefficients so they broadcast against t of rank ndim."""
    if ndim == 1:
        return coefficients
    return {key: value.reshape((-1,) + (1,) * (ndim - 1)) for key, value in coefficients.items()}


def _rows(coefficients: Coefficients, rows: NDArray[np.intp]) -> Coefficients:
    return {key: value[rows] for key, value in coefficients.items()}


class Nonlinearity(ABC):
    """f(x, t) with f(x, 0) = 0."""

    name: str = "nonlinearity"

    def coefficients(self, x: NDArray[np.float64]) -> Coefficients:
        return {}

    @abstractmethod
    def evaluate(self, coefficients: Coefficients, t: NDArray[np.float64]) -> NDArray[np.float64]:
        """f at t; coefficients already broadcast against t."""

    def antiderivative(
        self, coefficients: Coefficients, t: NDArray[np.float64]
    ) -> NDArray[np.float64] | None:
        """Closed-form F, or None when F must come from quadrature."""
        return None

    @property
    def closed_form(self) -> bool:
        return type(self).antiderivative is not Nonlinearity.antiderivative

    def bind(self, x: ArrayLike) -> BoundNonlinearity:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return BoundNonlinearity(self, self.coefficients(x))

    def f(self, x: ArrayLike, t: ArrayLike) -> NDArray[np.float64]:
        """f at paired samples x (m, N) and t (m,)."""
        return self.bind(x).value(t)

    def F(self, x: ArrayLike, t: ArrayLike) -> NDArray[np.float64]:
        """F at paired samples x (m, N) and t (m,)."""
        return self.bind(x).primitive(t)


@dataclass(frozen=True)
class BoundNonlinearity:
    """A nonlinearity with its coefficients sampled at m fixed points."""

    nonlinearity: Nonlinearity
    coefficients: Coefficients

    def value(self, t: ArrayLike) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            return self.nonlinearity.evaluate(_column(self.coefficients, t.ndim), t)

    def primitive(self, t: ArrayLike) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            closed = self.nonlinearity.antiderivative(_column(self.coefficients, t.ndim), t)
        if closed is not None:
            return np.asarray(closed, dtype=float)
        flat = t.reshape(-1)
        points = t.shape[0] if t.ndim else 1
        owner = np.repeat(np.arange(points), flat.size // max(points, 1))

        def integrand(rows: NDArray[np.intp], s: NDArray[np.float64]) -> NDArray[np.float64]:
            with np.errstate(over="ignore", invalid="ignore"):
                return self.nonlinearity.evaluate(
                    _column(_rows(self.coefficients, owner[rows]), 2), s
                )

        return simpson_primitive(integrand, flat).reshape(t.shape)

    def subset(self, mask: ArrayLike) -> BoundNonlinearity:
        return BoundNonlinearity(self.nonlinearity, _rows(self.coefficients, np.asarray(mask)))


def _signed_power(t: NDArray[np.float64], q: NDArray[np.float64] | float) -> NDArray[np.float64]:
    return np.sign(t) * np.abs(t) ** (q - 1.0)


class PowerLog(Nonlinearity):
    """f = scale |t|^{p-2} t [ln(1 + |t|)]^{a}; satisfies (H0)-(H3) but not AR."""

    name = "power-log"

    def __init__(self, p: ExponentLike, a: ExponentLike, scale: float = 1.0):
        self.p = p
        self.a = a
        self.scale = scale

    def coefficients(self, x: NDArray[np.float64]) -> Coefficients:
        return {"p": _sample(self.p, x), "a": _sample(self.a, x)}

    def evaluate(self, coefficients: Coefficients, t: NDArray[np.float64]) -> NDArray[np.float64]:
        log_factor = np.log1p(np.abs(t)) ** coefficients["a"]
        return self.scale * _signed_power(t, coefficients["p"]) * log_factor


class Power(Nonlinearity):
    """f = scale |t|^{q-2} t with F = scale |t|^q / q."""

    name = "power"

    def __init__(self, exponent: ExponentLike, scale: float = 1.0):
        self.exponent = exponent
        self.scale = scale

    def coefficients(self, x: NDArray[np.float64]) -> Coefficients:
        return {"q": _sample(self.exponent, x)}

    def evaluate(self, coefficients: Coefficients, t: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.scale * _signed_power(t, coefficients["q"])

    def antiderivative(self, coefficients: Coefficients, t: NDArray[np.float64]) -> NDArray[np.float64]:
        q = coefficients["q"]
        return self.scale * np.abs(t) ** q / q


class Zero(Nonlinearity):
    name = "zero"

    def evaluate(self, coefficients: Coefficients, t: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.zeros_like(t)

    def antiderivative(self, coefficients: Coefficients, t: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.zeros_like(t)


class Exponential(Nonlinearity):
    """f = e^t - 1; grows faster than any power."""

    name = "exponential"

    def evaluate(self, coefficients: Coefficients, t: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.expm1(t)

    def antiderivative(self, coefficients: Coefficients, t: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.expm1(t) - t


class Square(Nonlinearity):
    """f = t^2; even, so (H3) fails."""

    name = "square"

    def evaluate(self, coefficients: Coefficients, t: NDArray[np.float64]) -> NDArray[np.float64]:
        return t * t

    def antiderivative(self, coefficients: Coefficients, t: NDArray[np.float64]) -> NDArray[np.float64]:
        return t**3 / 3.0
