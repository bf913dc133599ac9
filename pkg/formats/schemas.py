"""
Pydantic models of the hforge-*-v1 documents.

The models check shape and scalar types only; the domain constructors in
models/ still enforce graph, instance and schedule invariants.
"""

from fractions import Fraction
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, StrictInt, StrictStr, model_validator

from models.digraph import BIT, TEST, id_for_bit, id_for_test
from utils.rationals import to_fraction

GRAPH_FORMAT = "hforge-graph-v1"
UG_FORMAT = "hforge-ug-v1"
DEADLINE_FORMAT = "hforge-deadline-v1"
WITNESS_FORMAT = "hforge-witness-v1"
REALIZATION_FORMAT = "hforge-realization-v1"
REPORT_FORMAT = "hforge-report-v1"

PLAIN_KIND = "plain"

Rational = Annotated[Fraction, BeforeValidator(to_fraction)]
ArcEnd = Union[StrictInt, StrictStr]
MenuIndex = Annotated[StrictInt, Field(ge=0)]


class _Entry(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)


class VertexEntry(_Entry):
    id: StrictStr
    role: Literal["bit", "test"]
    x: List[StrictInt]
    layer: Optional[StrictInt] = None
    S: Optional[List[StrictInt]] = Field(default=None, description="Index sequence; test vertices only")
    w: Optional[StrictStr] = None
    v: Optional[StrictStr] = None
    slots: Optional[List[Tuple[StrictStr, StrictInt]]] = Field(
        default=None, description="[w, edge index] per neighbour slot"
    )

    @model_validator(mode="after")
    def tests_carry_a_sequence(self) -> "VertexEntry":
        if self.role == TEST and self.S is None:
            raise ValueError(f"Test vertex {self.id} has no index sequence S")
        return self

    def expected_id(self, k: int) -> str:
        if self.role == BIT:
            return id_for_bit(self.x, k, self.layer, self.w)
        return id_for_test(self.x, self.S, k, self.layer, self.v, self.slots)


class GraphDocument(_Entry):
    format: Literal[GRAPH_FORMAT]
    kind: StrictStr = Field(description="plain, two-type, fvs-gadget, dvd-gadget, ug-fvs or ug-dvd")
    k: Optional[StrictInt] = Field(default=None, ge=1, description="Alphabet size; two-type graphs only")
    n: Optional[StrictInt] = Field(default=None, ge=0, description="Vertex count; plain graphs only")
    vertices: Optional[List[VertexEntry]] = None
    arcs: List[Tuple[ArcEnd, ArcEnd]]
    labels: Optional[List[Any]] = Field(default=None, description="Origin of every plain vertex")
    provenance: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def fields_match_the_kind(self) -> "GraphDocument":
        if self.kind == PLAIN_KIND:
            if self.n is None:
                raise ValueError("Plain graph without a vertex count n")
            if any(isinstance(end, str) for arc in self.arcs for end in arc):
                raise ValueError("Plain graph arcs join vertex indices")
            return self
        if self.k is None or self.vertices is None:
            raise ValueError("Two-type graph without k or vertices")
        if any(isinstance(end, int) for arc in self.arcs for end in arc):
            raise ValueError("Two-type graph arcs join vertex ids")
        for entry in self.vertices:
            expected = entry.expected_id(self.k)
            if entry.id != expected:
                raise ValueError(f"Vertex id {entry.id!r} does not match its data (expected {expected!r})")
        return self


class EdgeEntry(_Entry):
    v: StrictStr
    w: StrictStr
    perm: List[StrictInt]


class UgDocument(_Entry):
    format: Literal[UG_FORMAT]
    R: StrictInt = Field(ge=1)
    V: List[StrictStr]
    W: List[StrictStr]
    edges: List[EdgeEntry]
    planted: Optional[Dict[str, StrictInt]] = Field(
        default=None, description="Labeling planted by the satisfiable generator"
    )


class MenuChoice(_Entry):
    duration: Rational
    cost: Rational


class ActivityEntry(_Entry):
    id: StrictStr
    menu: List[MenuChoice] = Field(min_length=1)


class DeadlineDocument(_Entry):
    format: Literal[DEADLINE_FORMAT]
    activities: List[ActivityEntry]
    precedence: List[Tuple[StrictStr, StrictStr]]
    deadline: Rational
    provenance: Dict[str, Any] = Field(default_factory=dict)


class WitnessDocument(_Entry):
    format: Literal[WITNESS_FORMAT]
    kind: StrictStr
    params: Dict[str, Any]
    prime: List[StrictStr]
    classes: List[List[StrictStr]]
    s: Optional[StrictInt] = Field(default=None, ge=0, description="Dictator coordinate, gadget witnesses only")
    labeling: Optional[Dict[str, StrictInt]] = Field(default=None, description="Labeling, reduction witnesses only")


class RealizationDocument(_Entry):
    format: Literal[REALIZATION_FORMAT]
    choice: Dict[str, MenuIndex] = Field(description="Activity id to menu index")
    cost: Optional[Rational] = Field(default=None, description="Total cost as written by the solver; not checked")


class ReportDocument(_Entry):
    format: Literal[REPORT_FORMAT]
    command: StrictStr
    params: Dict[str, Any]
    seed: Optional[StrictInt] = None
    results: List[Dict[str, Any]]
    summary: Dict[str, Any] = Field(default_factory=dict)
    timing: Dict[str, Any] = Field(default_factory=dict, description="Wall-clock seconds; not reproducible")


DOCUMENTS = {
    GRAPH_FORMAT: GraphDocument,
    UG_FORMAT: UgDocument,
    DEADLINE_FORMAT: DeadlineDocument,
    WITNESS_FORMAT: WitnessDocument,
    REALIZATION_FORMAT: RealizationDocument,
    REPORT_FORMAT: ReportDocument,
}
