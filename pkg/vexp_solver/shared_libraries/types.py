"""Report and configuration schema shared by the vexp-solver modules."""

from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from vexp_solver.shared_libraries import constants


class Verdict(str, Enum):
    """Outcome of a sample-based certification."""

    CERTIFIED = "certified-on-samples"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"
    INAPPLICABLE = "inapplicable"
    NOT_CERTIFIED = "not-certified"


class EmbeddingEstimate(BaseModel):
    """Lower bound for the embedding constant of X into L^alpha."""
    value: float
    running_max: list[float] = []
    trials: int = 0


class Witness(BaseModel):
    """A sample point (x, t) at which a hypothesis fails."""
    x: list[float] = []
    t: Optional[float] = None
    detail: str = ""


class HypothesisReport(BaseModel):
    """Verdict of one hypothesis check plus the constants it fitted."""
    name: str
    verdict: Verdict
    constants: dict[str, float] = {}
    witness: Optional[Witness] = None

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED


class ConeLemmaRow(BaseModel):
    epsilon: float
    nodes_in_cone: int
    dot_product_positive: bool
    max_on_cap: bool


class ConeLemmaReport(BaseModel):
    """Node-sampled check of the cone geometry around x0."""
    verdict: Verdict
    certifying_epsilon: Optional[float] = None
    rows: list[ConeLemmaRow] = []


class BlowdownReport(BaseModel):
    """phi(t h) along t = 2^k."""
    verdict: Verdict
    t_values: list[float] = []
    energies: list[float] = []
    zero_crossing_t: Optional[float] = None
    deep_crossing_t: Optional[float] = None
    largest_t: Optional[float] = None


class SphereSample(BaseModel):
    radius: float
    min_energy: float
    max_energy: Optional[float] = None


class GeometryReport(BaseModel):
    """Sampled mountain-pass geometry; minima are upper bounds for the true sphere minimum."""
    verdict: Verdict
    radius: Optional[float] = None
    delta: Optional[float] = None
    far_point_norm: Optional[float] = None
    far_point_energy: Optional[float] = None
    spheres: list[SphereSample] = []
    heuristic: bool = True


class PositivityReport(BaseModel):
    positive: bool
    min_interior: float


class SolverReport(BaseModel):
    """Telemetry of one mountain-pass solve; complete even on failure."""
    variant: Literal["plus", "minus", "full"] = "full"
    energies: list[float] = []
    cerami: list[float] = []
    norms: list[float] = []
    log_pairings: list[float] = []
    steps: list[float] = []
    converged: bool = False
    iterations: int = 0
    final_residual: float = float("nan")
    final_energy: float = float("nan")
    final_norm: float = float("nan")
    profile: list[float] = []
    positivity: Optional[PositivityReport] = None
    message: str = ""


class CeramiVerdict(BaseModel):
    bounded: bool
    bound: float
    witness_iteration: Optional[int] = None
    witness_norm: Optional[float] = None


class DecayRow(BaseModel):
    half_width: float
    tail_max_u: float
    tail_max_gradu: float
    converged: bool = True


class DecayTable(BaseModel):
    verdict: Verdict
    rows: list[DecayRow] = []


class BetaRow(BaseModel):
    k: int
    beta: float


class IndexBookkeeping(BaseModel):
    """codim V+ + 1 against dim V- for the paired subspaces."""
    codim_plus: int
    dim_minus: int
    consistent: bool


class A2Report(BaseModel):
    verdict: Verdict
    radius: Optional[float] = None
    spheres: list[SphereSample] = []
    bookkeeping: Optional[IndexBookkeeping] = None
    heuristic: bool = True


class A1Row(BaseModel):
    k: int
    beta: float
    gamma: float
    min_energy: float


class A1Report(BaseModel):
    verdict: Verdict
    c_sigma: Optional[float] = None
    rows: list[A1Row] = []
    bookkeeping: list[IndexBookkeeping] = []
    heuristic: bool = True


# --- run configuration -------------------------------------------------------

_STRICT = ConfigDict(extra="forbid")


class ExponentSpec(BaseModel):
    """p(x) as a named family with coefficients."""
    model_config = _STRICT
    kind: Literal["constant", "linear", "bump"] = "constant"
    value: float = 2.0
    slope: float = 0.0


class PotentialSpec(BaseModel):
    """V(x) = base + curvature * |x|^2."""
    model_config = _STRICT
    base: float = 1.0
    curvature: float = 0.0


class NonlinearitySpec(BaseModel):
    model_config = _STRICT
    kind: Literal["power-log", "power", "zero"] = "power"
    exponent: Optional[float] = None
    scale: float = 1.0


class InlineInstance(BaseModel):
    model_config = _STRICT
    p: ExponentSpec = Field(default_factory=ExponentSpec)
    V: PotentialSpec = Field(default_factory=PotentialSpec)
    f: NonlinearitySpec = Field(default_factory=NonlinearitySpec)
    alpha_offset: float = 0.5
    a_offset: float = 1.0


class InstanceConfig(BaseModel):
    model_config = _STRICT
    name: Optional[str] = "cubic-constant-exponent"
    inline: Optional[InlineInstance] = None


class GridConfig(BaseModel):
    model_config = _STRICT
    dimension: Literal[1, 2] = 1
    half_width: float = Field(default=20.0, gt=0)
    nodes: int = Field(default=801, ge=3)


class SolverConfig(BaseModel):
    model_config = _STRICT
    tol: float = Field(default=constants.CERAMI_TOL, gt=0)
    max_iterations: int = Field(default=constants.MAX_OUTER_ITERATIONS, ge=1)
    path_points: int = Field(default=constants.PATH_POINTS, ge=3)
    seed: int = Field(default=0, ge=0)
    path: Literal["spline", "ray"] = "spline"
    variant: Literal["plus", "minus", "full"] = "plus"
    cone_radius: float = Field(default=2.0, gt=0)


class DecayConfig(BaseModel):
    model_config = _STRICT
    radii: list[float] = [10.0, 15.0, 20.0]
    spacing: float = Field(default=0.05, gt=0)


class MultiplicityConfig(BaseModel):
    model_config = _STRICT
    ks: list[int] = [1, 4, 16]
    cones: int = Field(default=2, ge=1)
    rhos: list[float] = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
    restarts: int = Field(default=4, ge=1)
    samples: int = Field(default=16, ge=1)


class GeometryConfig(BaseModel):
    model_config = _STRICT
    radii: list[float] = [0.01, 0.05, 0.1, 0.5, 1.0]
    samples: int = Field(default=32, ge=1)
    theta: float = Field(default=0.7853981633974483, gt=0, lt=1.5707963267948966)
    delta: float = Field(default=0.0, ge=0)
    epsilons: list[float] = [0.25, 0.5, 1.0]


class RunConfig(BaseModel):
    """Fully resolved configuration of one CLI run."""
    model_config = _STRICT
    experiment: Literal[
        "solve", "check-hypotheses", "verify-geometry", "decay-study", "multiplicity"
    ] = "solve"
    output_dir: str = "runs"
    instance: InstanceConfig = Field(default_factory=InstanceConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    decay: DecayConfig = Field(default_factory=DecayConfig)
    multiplicity: MultiplicityConfig = Field(default_factory=MultiplicityConfig)
