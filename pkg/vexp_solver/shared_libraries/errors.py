"""Exception hierarchy for vexp-solver."""


class VexpError(Exception):
    """Base class for all solver errors."""


class IntegrationError(VexpError):
    """A quadrature met a non-finite nodal value."""

    def __init__(self, node: int, value: float):
        super().__init__(f"non-finite value {value!r} at node {node}")
        self.node = node
        self.value = value


class DomainError(VexpError, ValueError):
    """An argument lies outside the operation's domain."""


class HypothesisViolation(VexpError, ValueError):
    """Problem data breaks a standing hypothesis (V), (p), (H0) or (H1)."""


class EnergyOverflowError(VexpError, ArithmeticError):
    """The energy overflowed; retry with a smaller scale t or a finer grid."""


class PreconditionError(VexpError):
    """A geometric lemma is inapplicable at the requested point."""


class InvalidGeometryError(VexpError):
    """The mountain-pass path does not straddle a mountain."""


class CapacityError(VexpError, ValueError):
    """The requested cone family does not fit in the grid."""

    def __init__(self, requested: int, feasible: int):
        super().__init__(
            f"{requested} disjoint cones do not fit; max feasible k is {feasible}"
        )
        self.requested = requested
        self.feasible = feasible


class WitnessUndefined(VexpError):
    """The modular/norm exponent witness is undefined when the norm equals 1."""


class ConfigError(VexpError, ValueError):
    """The run configuration is malformed."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
