"""Mountain-pass solver and the geometric checks it rests on."""

from vexp_solver.mountain_pass.decay import decay_study, tail_metrics
from vexp_solver.mountain_pass.diagnostics import cerami_telemetry, positivity_check
from vexp_solver.mountain_pass.geometry import (
    ConeSet,
    ConeTestFunction,
    far_point,
    verify_blowdown,
    verify_cone_lemma,
    verify_mp_geometry,
)
from vexp_solver.mountain_pass.solver import PathMaximum, RayPath, SplinePath, mountain_pass_solve

__all__ = [
    "ConeSet",
    "ConeTestFunction",
    "PathMaximum",
    "RayPath",
    "SplinePath",
    "cerami_telemetry",
    "decay_study",
    "far_point",
    "mountain_pass_solve",
    "positivity_check",
    "tail_metrics",
    "verify_blowdown",
    "verify_cone_lemma",
    "verify_mp_geometry",
]
