from pydantic import BaseModel, Field, model_validator
from typing import Dict, List, Literal, Optional, Tuple, Union

# Rationals travel as "num/den" strings; field elements as lists of them (coefficient of pi^i at index i).
RationalText = str
ElemText = Union[RationalText, List[RationalText]]


class FieldModel(BaseModel):
    p: int
    e: int = 1


class PointModel(BaseModel):
    center: Optional[ElemText] = None
    logradius: Optional[RationalText] = None  # "inf" for a type I point
    infinity: bool = False

    @model_validator(mode="after")
    def _check_shape(self):
        if not self.infinity and (self.center is None or self.logradius is None):
            raise ValueError("a point needs center and logradius unless infinity is true")
        return self


class TemplateMapModel(BaseModel):
    template: Literal["sextic"]
    a: ElemText
    b: ElemText


class ExplicitMapModel(BaseModel):
    num: List[ElemText]
    den: List[ElemText]


class SessionConfig(BaseModel):
    field: FieldModel
    map: Union[TemplateMapModel, ExplicitMapModel]
    certificate: Optional[str] = None
    system: Optional[str] = None
    format: Optional[Literal["json", "text", "dot"]] = None


# ---- certificates and Markov systems ----

class IntervalModel(BaseModel):
    endpoints: List[PointModel] = Field(min_length=2, max_length=2)
    x0: PointModel


class SubdivisionModel(BaseModel):
    endpoints: List[PointModel] = Field(min_length=2, max_length=2)
    b: int
    c: int


class PreimageModel(BaseModel):
    point: PointModel
    degree: int


class CoveringModel(BaseModel):
    edge: List[PointModel] = Field(min_length=2, max_length=2)
    n: int


class CertificateModel(BaseModel):
    tree: List[PointModel]
    interval: IntervalModel
    subdivision: List[SubdivisionModel]
    preimages: List[PreimageModel]
    covering: List[CoveringModel]
    period: int = 1


class MarkovStateModel(BaseModel):
    name: str
    image: List[str] = Field(default_factory=list)
    degree: int
    countable: bool = False


class TailFamilyModel(BaseModel):
    entry: str
    target: str
    branch: int
    multiplicity: int = 1
    degree: int = 1


class MarkovSystemModel(BaseModel):
    d: int
    states: List[MarkovStateModel]
    families: List[TailFamilyModel] = Field(default_factory=list)
    root: Optional[str] = None


# ---- results ----

class MappedPointModel(BaseModel):
    point: PointModel
    image: PointModel
    local_degree: int
    reduction: Optional[str] = None
    field: FieldModel


class SegmentPieceModel(BaseModel):
    source: List[PointModel]
    image: List[PointModel]
    expansion: int
    orientation: int


class SegmentImageModel(BaseModel):
    pieces: List[SegmentPieceModel]
    field: FieldModel


class TheoremAReportModel(BaseModel):
    a: bool
    b: bool
    c: bool
    d: bool
    passed: bool
    failed: List[str]
    notes: Dict[str, str] = Field(default_factory=dict)
    infinite_branching: Optional[bool] = None


class BranchingModel(BaseModel):
    point: PointModel
    period: int
    infinite_branching: bool


class MarkovCheckModel(BaseModel):
    passed: bool
    images_are_states: bool
    degrees_in_range: bool
    countable_closed: bool
    families_finite: bool
    root_reaches_all: bool
    expanding_cycles: bool
    notes: List[str] = Field(default_factory=list)


class PartitionModel(BaseModel):
    system: MarkovSystemModel
    hypotheses: MarkovCheckModel


class FamilyMassModel(BaseModel):
    depth_factor: RationalText
    scale: RationalText
    aggregate: RationalText


class MassesModel(BaseModel):
    core: Dict[str, RationalText]
    families: Dict[str, FamilyMassModel]
    total_check: RationalText


class HMuModel(BaseModel):
    exact: List[Tuple[RationalText, int]]
    nats: float


class HTopModel(BaseModel):
    state: str
    minpoly: List[int]  # ascending coefficients
    interval: List[RationalText]
    value: float
    nats: float


class TruncationModel(BaseModel):
    depth: int
    nats: float


class IntervalNullModel(BaseModel):
    coefficient: RationalText
    null: bool
    leaf_mass_one: bool


class ChecksModel(BaseModel):
    total_mass: Optional[RationalText] = None
    sandwich: Optional[bool] = None
    state_independent: Optional[bool] = None
    interval_null: Optional[IntervalNullModel] = None


class EntropyResults(BaseModel):
    h_mu: Optional[HMuModel] = None
    h_top: Optional[HTopModel] = None
    truncation: Optional[List[TruncationModel]] = None
    masses: Optional[MassesModel] = None
    checks: ChecksModel = Field(default_factory=ChecksModel)


class GenFnModel(BaseModel):
    state: str
    numerator: List[RationalText]
    denominator: List[RationalText]
    one_minus_numerator: List[RationalText]
    expr: str


class DendriteNodeModel(BaseModel):
    id: int
    label: str
    depth: int
    kind: Literal["core", "family"]


class DendriteModel(BaseModel):
    nodes: List[DendriteNodeModel]
    edges: List[Tuple[int, int]]
