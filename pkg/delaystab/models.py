from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, RootModel, model_validator

from delaystab.distributions import (
    DelayDistribution,
    DiracMass,
    DiscreteMixture,
    Exponential,
    GammaKernel,
    Uniform,
)


# --- distribution spec files ----------------------------------------------


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AtomSpec(_Spec):
    delay: float = Field(ge=0, allow_inf_nan=False)
    weight: float = Field(gt=0, allow_inf_nan=False)


class DiscreteSpec(_Spec):
    kind: Literal["discrete"] = "discrete"
    atoms: list[AtomSpec] = Field(min_length=1)

    def build(self) -> DiscreteMixture:
        return DiscreteMixture.from_atoms((a.delay, a.weight) for a in self.atoms)


class DiracSpec(_Spec):
    kind: Literal["dirac"] = "dirac"
    delay: float = Field(ge=0, allow_inf_nan=False)

    def build(self) -> DiracMass:
        return DiracMass(self.delay)


class ExponentialSpec(_Spec):
    kind: Literal["exponential"] = "exponential"
    mean: float = Field(gt=0, allow_inf_nan=False)

    def build(self) -> Exponential:
        return Exponential(self.mean)


class GammaSpec(_Spec):
    kind: Literal["gamma"] = "gamma"
    order: int = Field(ge=1)
    mean: float = Field(gt=0, allow_inf_nan=False)

    def build(self) -> GammaKernel:
        return GammaKernel(self.order, self.mean)


class UniformSpec(_Spec):
    kind: Literal["uniform"] = "uniform"
    lower: float = Field(ge=0, allow_inf_nan=False)
    upper: float = Field(allow_inf_nan=False)

    @model_validator(mode="after")
    def _ordered(self):
        if self.upper <= self.lower:
            raise ValueError("upper must exceed lower")
        return self

    def build(self) -> Uniform:
        return Uniform(self.lower, self.upper)


DistributionSpec = Annotated[
    Union[DiscreteSpec, DiracSpec, ExponentialSpec, GammaSpec, UniformSpec],
    Field(discriminator="kind"),
]


class SpecDocument(RootModel[DistributionSpec]):
    pass


def spec_of(dist: DelayDistribution) -> SpecDocument:
    if isinstance(dist, DiracMass):
        spec = DiracSpec(delay=dist.location)
    elif isinstance(dist, DiscreteMixture):
        spec = DiscreteSpec(atoms=[AtomSpec(delay=d, weight=w) for d, w in dist.atoms])
    elif isinstance(dist, Exponential):
        spec = ExponentialSpec(mean=dist.mean_delay)
    elif isinstance(dist, GammaKernel):
        spec = GammaSpec(order=dist.order, mean=dist.mean_delay)
    elif isinstance(dist, Uniform):
        spec = UniformSpec(lower=dist.lower, upper=dist.upper)
    else:
        raise TypeError(f"no spec form for {type(dist).__name__}")
    return SpecDocument(spec)


# --- command output --------------------------------------------------------

ComplexPair = tuple[float, float]


def complex_pair(z: Optional[complex]) -> Optional[ComplexPair]:
    return None if z is None else (float(z.real), float(z.imag))


class Witness(BaseModel):
    omega_s: Optional[float] = None
    leading_root: Optional[ComplexPair] = None
    note: Optional[str] = None


class VerdictOut(BaseModel):
    status: str
    witness: Witness
    bound_used: Optional[float] = None


class RootReportOut(BaseModel):
    unstable_count: int
    leading_root: Optional[ComplexPair]
    contour_bound: float
    marginal: bool


class CheckResponse(BaseModel):
    a: float
    b: float
    E: float
    region: VerdictOut
    sufficient: Optional[VerdictOut] = None
    roots: Optional[RootReportOut] = None
    verdict: VerdictOut


class ExtremalOut(BaseModel):
    tau2_star: float
    p1_star: float
    p2_star: float
    s_star: float
    omega_s: float
    mean: float
    c_preserved: float
    flagged: bool
    steps: int


class NoCrossingOut(BaseModel):
    status: str = "Stable"
    message: str


class DecayOut(BaseModel):
    mean: float
    decay_rate: float
    method: str
    dt: float
    T: float
    leading_root: Optional[ComplexPair] = None


class SelftestCase(BaseModel):
    name: str
    passed: bool
    detail: str
    seconds: float


class SelftestReport(BaseModel):
    passed: bool
    cases: list[SelftestCase]


class RunSummary(BaseModel):
    run_id: int
    command: str
    created_at: str
    distribution: Optional[str]
    parameters: str
    rows: int
