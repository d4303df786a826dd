"""Problem instances and hypothesis certification."""

from vexp_solver.problem_def.hypotheses import (
    check_AR,
    check_H0,
    check_H1,
    check_H2,
    check_H3,
    check_V,
)
from vexp_solver.problem_def.instances import (
    BUILTIN_INSTANCES,
    ExponentProfile,
    ProblemInstance,
    get_instance,
    inline_instance,
)

__all__ = [
    "BUILTIN_INSTANCES",
    "ExponentProfile",
    "ProblemInstance",
    "check_AR",
    "check_H0",
    "check_H1",
    "check_H2",
    "check_H3",
    "check_V",
    "get_instance",
    "inline_instance",
]
