"""Sample-based certification of the standing hypotheses.

Each check evaluates the instance on a finite set of (x, t) samples and
returns a HypothesisReport. A certified verdict only ever means
"certified-on-samples"; a violated verdict always carries a witness.
"""

import logging
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vexp_solver.problem_def.instances import ProblemInstance
from vexp_solver.shared_libraries import constants
from vexp_solver.shared_libraries.errors import IntegrationError
from vexp_solver.shared_libraries.types import HypothesisReport, Verdict, Witness

logger = logging.getLogger(__name__)


def _points(x: ArrayLike) -> NDArray[np.float64]:
    return np.atleast_2d(np.asarray(x, dtype=float))


def _product(x: NDArray[np.float64], t: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """All pairs (x_i, t_j), x varying slowest."""
    return np.repeat(x, t.size, axis=0), np.tile(t, x.shape[0])


def _witness(x: NDArray[np.float64], t: Optional[float], detail: str) -> Witness:
    return Witness(x=[float(v) for v in x], t=None if t is None else float(t), detail=detail)


def _report(name: str, verdict: Verdict, witness: Optional[Witness] = None, **fitted: float) -> HypothesisReport:
    report = HypothesisReport(name=name, verdict=verdict, constants=fitted, witness=witness)
    logger.info(f"{name}: {verdict.value} {fitted if fitted else ''}".rstrip())
    return report


def _symmetric(t: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.concatenate([t, -t])


def _ray_directions(dimension: int) -> NDArray[np.float64]:
    if dimension == 1:
        return np.array([[1.0], [-1.0]])
    angles = np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def check_V(
    instance: ProblemInstance,
    dimension: int = 1,
    base_radius: float = 1.0,
    x_samples: Optional[ArrayLike] = None,
) -> HypothesisReport:
    """(V): V >= V0 > 0 and V -> infinity along rays at radii 2^k R0."""
    radii = base_radius * 2.0 ** np.arange(constants.V_RADIAL_DOUBLINGS + 1)
    directions = _ray_directions(dimension)
    ray_points = (directions[:, None, :] * radii[None, :, None]).reshape(-1, dimension)
    points = [np.zeros((1, dimension)), ray_points]
    if x_samples is not None:
        points.append(_points(x_samples))
    points = np.concatenate(points)
    values = instance.V(points)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise IntegrationError(int(bad[0]), float(values[bad[0]]))

    lowest = int(np.argmin(values))
    v0 = float(values[lowest])
    if v0 <= 0.0:
        return _report("V", Verdict.VIOLATED, _witness(points[lowest], None, f"V = {v0:.6g} <= 0"))

    along = instance.V(ray_points).reshape(directions.shape[0], radii.size)
    for ray, profile in enumerate(along):
        far = directions[ray] * radii[-1]
        if not np.all(np.diff(profile) > 0.0):
            return _report("V", Verdict.VIOLATED, _witness(far, None, "V does not grow along the ray"), V0=v0)
        if profile[-1] < constants.V_GROWTH_FACTOR * v0:
            return _report(
                "V", Verdict.VIOLATED, _witness(far, None, f"V = {profile[-1]:.6g} at the largest radius"), V0=v0
            )
    return _report("V", Verdict.CERTIFIED, V0=v0)


def _h0_constant(instance: ProblemInstance, x: NDArray[np.float64], samples: int) -> tuple[float, NDArray[np.float64], float]:
    t = _symmetric(np.geomspace(constants.H0_T_MIN, constants.H0_T_MAX, samples))
    X, T = _product(x, t)
    magnitude = np.abs(T)
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = np.abs(instance.f(X, T)) / (
            magnitude ** (instance.p(X) - 1.0) + magnitude ** (instance.alpha(X) - 1.0)
        )
    ratio = np.where(np.isnan(ratio), np.inf, ratio)
    worst = int(np.argmax(ratio))
    return float(ratio[worst]), X[worst], float(T[worst])


def check_H0(instance: ProblemInstance, x_samples: ArrayLike) -> HypothesisReport:
    """(H0): |f| <= C (|t|^{p-1} + |t|^{alpha-1}), C fitted and stable under sample doubling."""
    x = _points(x_samples)
    coarse, _, _ = _h0_constant(instance, x, constants.H0_COARSE_SAMPLES)
    fine, x_worst, t_worst = _h0_constant(instance, x, 2 * constants.H0_COARSE_SAMPLES)
    if not np.isfinite(fine):
        return _report("H0", Verdict.VIOLATED, _witness(x_worst, t_worst, "growth bound is not finite"))
    if fine > coarse * (1.0 + constants.H0_GROWTH_LIMIT) and fine > 0.0:
        return _report(
            "H0",
            Verdict.VIOLATED,
            _witness(x_worst, t_worst, f"C grew from {coarse:.6g} to {fine:.6g} on refinement"),
        )
    return _report("H0", Verdict.CERTIFIED, C=fine)


def _h1_terms(
    instance: ProblemInstance, X: NDArray[np.float64], T: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    p = instance.p(X)
    a = instance.a(X)
    f = instance.f(X, T)
    F = instance.F(X, T)
    magnitude = np.abs(T)
    log_e = np.log(np.e + magnitude)
    tf = T * f
    g1 = magnitude**p * log_e ** (a - 1.0)
    g2 = tf / log_e
    g3 = tf - p * F
    g3 = np.where(np.abs(g3) <= 1e-12 * (np.abs(tf) + np.abs(p * F)), 0.0, g3)
    return g1, g2, g3


def check_H1(
    instance: ProblemInstance,
    x_samples: ArrayLike,
    t_samples: Optional[ArrayLike] = None,
    m_candidates: Sequence[float] = constants.H1_M_CANDIDATES,
) -> HypothesisReport:
    """(H1): C1 |t|^p ln(e+|t|)^{a-1} <= C2 tf/ln(e+|t|) <= tf - pF for |t| >= M.

    M runs over the candidates in increasing order; the smallest certifying M
    is reported.
    """
    x = _points(x_samples)
    if t_samples is None:
        t_samples = np.geomspace(1.0, constants.LARGE_T_SAMPLES[-1], 61)
    t = _symmetric(np.abs(np.asarray(t_samples, dtype=float)))
    X, T = _product(x, t)
    g1, g2, g3 = _h1_terms(instance, X, T)

    witness: Optional[Witness] = None
    for M in sorted(m_candidates):
        mask = np.abs(T) >= M
        if not np.any(mask):
            continue
        index = np.flatnonzero(mask)
        nonpositive = index[g2[index] <= 0.0]
        if nonpositive.size:
            i = int(nonpositive[0])
            witness = _witness(X[i], T[i], f"tf/ln(e+|t|) = {g2[i]:.6g} <= 0 (M = {M:g})")
            continue
        c2_ratio = g3[index] / g2[index]
        c2 = float(c2_ratio.min())
        if not c2 > 0.0:
            i = int(index[np.argmin(c2_ratio)])
            witness = _witness(X[i], T[i], f"tf - pF = {g3[i]:.6g} (M = {M:g})")
            continue
        c1 = float(np.min(c2 * g2[index] / g1[index]))
        if not c1 > 0.0:
            i = int(index[np.argmin(c2 * g2[index] / g1[index])])
            witness = _witness(X[i], T[i], f"C1 = {c1:.6g} (M = {M:g})")
            continue
        return _report("H1", Verdict.CERTIFIED, C1=c1, C2=c2, M=float(M))
    if witness is None:
        witness = _witness(x[0], None, "no sample with |t| >= M")
    return _report("H1", Verdict.VIOLATED, witness)


def check_H2(instance: ProblemInstance, x_samples: ArrayLike) -> HypothesisReport:
    """(H2): |f(x, t)| / |t|^{p-1} decreases to below 1e-3 along t = 10^-k."""
    x = _points(x_samples)
    decades = np.arange(1, constants.H2_DECADES + 1)
    for sign in (1.0, -1.0):
        t = sign * 10.0 ** (-decades.astype(float))
        X, T = _product(x, t)
        ratio = (np.abs(instance.f(X, T)) / np.abs(T) ** (instance.p(X) - 1.0)).reshape(x.shape[0], t.size)
        for row, values in enumerate(ratio):
            rising = np.flatnonzero(values[1:] > values[:-1] * (1.0 + 1e-9) + 1e-300)
            if rising.size:
                k = int(rising[0]) + 1
                return _report(
                    "H2", Verdict.VIOLATED, _witness(x[row], t[k], f"ratio rose to {values[k]:.6g}")
                )
            if not values[-1] < constants.H2_THRESHOLD:
                return _report(
                    "H2", Verdict.VIOLATED, _witness(x[row], t[-1], f"ratio {values[-1]:.6g} at the last decade")
                )
    return _report("H2", Verdict.CERTIFIED)


def check_H3(
    instance: ProblemInstance, x_samples: ArrayLike, t_samples: Optional[ArrayLike] = None
) -> HypothesisReport:
    """(H3): f is odd in t."""
    x = _points(x_samples)
    if t_samples is None:
        t_samples = np.concatenate([[1.0], np.geomspace(1e-3, 1e3, 25)])
    t = np.abs(np.asarray(t_samples, dtype=float).reshape(-1))
    X, T = _product(x, t)
    forward = instance.f(X, T)
    defect = np.abs(instance.f(X, -T) + forward)
    failing = np.flatnonzero(~(defect < constants.H3_RTOL * (1.0 + np.abs(forward))))
    if failing.size:
        i = int(failing[0])
        return _report("H3", Verdict.VIOLATED, _witness(X[i], T[i], f"|f(-t) + f(t)| = {defect[i]:.6g}"))
    return _report("H3", Verdict.CERTIFIED)


def check_AR(
    instance: ProblemInstance,
    x_samples: ArrayLike,
    thetas: Optional[Iterable[float]] = None,
    t_samples: Sequence[float] = constants.LARGE_T_SAMPLES,
) -> HypothesisReport:
    """Ambrosetti-Rabinowitz: 0 < theta F <= t f at large |t| for some theta > p+.

    The default grid is p+ plus AR_THETA_OFFSETS together with min(t f / F)
    over the samples, the largest theta every sample admits. The largest
    passing theta is reported when satisfied; otherwise the witness belongs
    to the smallest theta of the grid.
    """
    x = _points(x_samples)
    p_plus = float(instance.p(x).max())
    t = _symmetric(np.asarray(t_samples, dtype=float))
    X, T = _product(x, t)
    f = instance.f(X, T)
    F = instance.F(X, T)
    tf = T * f

    nonpositive = np.flatnonzero(~(F > 0.0))
    if nonpositive.size:
        i = int(nonpositive[0])
        return _report("AR", Verdict.INCONCLUSIVE, _witness(X[i], T[i], f"F = {F[i]:.6g} <= 0"))

    if thetas is None:
        thetas = [p_plus + offset for offset in constants.AR_THETA_OFFSETS]
        thetas.append(float(np.min(tf / F)))
    thetas = sorted(theta for theta in thetas if theta > p_plus)

    passing: list[float] = []
    first_witness: Optional[Witness] = None
    for theta in thetas:
        excess = theta * F - tf
        worst = int(np.argmax(excess))
        if excess[worst] > constants.AR_RTOL * abs(tf[worst]):
            if first_witness is None:
                first_witness = _witness(
                    X[worst], T[worst], f"theta F - t f = {excess[worst]:.6g} at theta = {theta:.6g}"
                )
        else:
            passing.append(theta)
    if passing:
        return _report("AR", Verdict.CERTIFIED, theta=max(passing))
    return _report("AR", Verdict.VIOLATED, first_witness, p_plus=p_plus)
