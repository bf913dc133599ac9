"""
Directed-graph types shared by every construction in hforge.

Two graph kinds exist. A TwoTypeDigraph carries the gadget view: string ids,
undeletable bit vertices and deletable test vertices, optionally layered. A
PlainDigraph is the collapsed, unweighted view over integer indices, with an
optional label per index pointing back to where the vertex came from.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import (
    Any,
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import networkx as nx

from utils.errors import BitDeletion, CyclicInput, InvalidGraph, ParamError, UnknownVertex

logger = logging.getLogger(__name__)

BIT = "bit"
TEST = "test"
ROLES = (BIT, TEST)

DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"

# graph kinds whose arcs must alternate between bit and test vertices
GADGET_KINDS = ("fvs-gadget", "dvd-gadget", "ug-fvs", "ug-dvd")
LAYERED_KINDS = ("dvd-gadget", "ug-dvd")
FLAT_KIND_OF = {"dvd-gadget": "fvs-gadget", "ug-dvd": "ug-fvs"}


def point_string(x: Sequence[int], k: int) -> str:
    """Base-k digit string of a point, coordinate 0 first."""
    if k > len(DIGITS):
        raise ParamError(f"k={k} exceeds the {len(DIGITS)}-symbol digit alphabet")
    return "".join(DIGITS[d] for d in x)


def id_for_bit(x: Sequence[int], k: int, layer: Optional[int] = None, w: Optional[str] = None) -> str:
    parts = ["b"]
    if layer is not None:
        parts.append(str(layer))
    parts.append(point_string(x, k))
    if w is not None:
        parts.append(f"w={w}")
    return ":".join(parts)


def id_for_test(
    x: Sequence[int],
    seq: Sequence[int],
    k: int,
    layer: Optional[int] = None,
    v: Optional[str] = None,
    slots: Optional[Sequence[Tuple[str, int]]] = None,
) -> str:
    parts = ["t"]
    if layer is not None:
        parts.append(str(layer))
    parts.append(point_string(x, k))
    parts.append(",".join(str(i) for i in seq))
    if v is not None:
        parts.append(f"v={v}")
        parts.append("ws=" + ",".join(f"{w}@{e}" for w, e in slots or ()))
    return ":".join(parts)


@dataclass(frozen=True)
class Vertex:
    """
    A vertex of a two-type graph.

    Bit payloads are (x, w) and test payloads are (x, S, v, slots) where w, v
    and slots are None on plain gadgets; slots lists (w-id, edge index) per
    neighbour position of a reduction test vertex.
    """

    id: str
    role: str
    layer: Optional[int] = None
    payload: Tuple[Any, ...] = ()

    @property
    def x(self) -> Tuple[int, ...]:
        return self.payload[0]


def make_bit_vertex(
    x: Sequence[int], k: int, layer: Optional[int] = None, w: Optional[str] = None
) -> Vertex:
    x = tuple(x)
    return Vertex(id=id_for_bit(x, k, layer, w), role=BIT, layer=layer, payload=(x, w))


def make_test_vertex(
    x: Sequence[int],
    seq: Sequence[int],
    k: int,
    layer: Optional[int] = None,
    v: Optional[str] = None,
    slots: Optional[Sequence[Tuple[str, int]]] = None,
) -> Vertex:
    x, seq = tuple(x), tuple(seq)
    slots = tuple(tuple(s) for s in slots) if slots is not None else None
    return Vertex(
        id=id_for_test(x, seq, k, layer, v, slots),
        role=TEST,
        layer=layer,
        payload=(x, seq, v, slots),
    )


@dataclass(frozen=True)
class TwoTypeDigraph:
    """
    Directed graph over tagged bit/test vertices.

    Bit vertices stand for weight-infinity vertices: they can never be
    deleted. `kind` names the construction (e.g. "fvs-gadget", "ug-dvd").
    """

    vertices: Tuple[Vertex, ...]
    arcs: FrozenSet[Tuple[str, str]]
    k: int
    kind: str = "two-type"
    provenance: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "arcs", frozenset((a, b) for a, b in self.arcs))
        if self.k < 2:
            raise InvalidGraph(f"k must be at least 2, got {self.k}")
        by_id: Dict[str, Vertex] = {}
        for vertex in self.vertices:
            if vertex.role not in ROLES:
                raise InvalidGraph(f"Vertex {vertex.id} has unknown role {vertex.role!r}")
            if vertex.id in by_id:
                raise InvalidGraph(f"Duplicate vertex id {vertex.id}")
            by_id[vertex.id] = vertex
        for tail, head in self.arcs:
            if tail not in by_id or head not in by_id:
                raise InvalidGraph(f"Arc ({tail}, {head}) has a missing endpoint")
            if self.kind in GADGET_KINDS:
                t, h = by_id[tail], by_id[head]
                if t.role == h.role:
                    raise InvalidGraph(f"Arc ({tail}, {head}) joins two {t.role} vertices")
                if self.kind in LAYERED_KINDS:
                    ok = t.layer <= h.layer if t.role == BIT else t.layer < h.layer
                    if not ok:
                        raise InvalidGraph(f"Arc ({tail}, {head}) goes against the layering")
        object.__setattr__(self, "_by_id", by_id)

    def vertex(self, vertex_id: str) -> Vertex:
        try:
            return self._by_id[vertex_id]
        except KeyError:
            raise UnknownVertex(f"No vertex {vertex_id!r}") from None

    def __contains__(self, vertex_id: object) -> bool:
        return vertex_id in self._by_id

    @property
    def layered(self) -> bool:
        return self.kind in LAYERED_KINDS

    @cached_property
    def ids(self) -> Tuple[str, ...]:
        return tuple(v.id for v in self.vertices)

    @cached_property
    def bit_ids(self) -> Tuple[str, ...]:
        return tuple(v.id for v in self.vertices if v.role == BIT)

    @cached_property
    def test_ids(self) -> Tuple[str, ...]:
        return tuple(v.id for v in self.vertices if v.role == TEST)

    @cached_property
    def nx_graph(self) -> nx.DiGraph:
        """Read-only networkx view; arcs are inserted in sorted order."""
        return _as_networkx(self.ids, self.arcs)

    @cached_property
    def successors(self) -> Dict[str, Tuple[str, ...]]:
        return {v: tuple(sorted(self.nx_graph.successors(v))) for v in self.ids}

    @cached_property
    def predecessors(self) -> Dict[str, Tuple[str, ...]]:
        return {v: tuple(sorted(self.nx_graph.predecessors(v))) for v in self.ids}

    def summary(self) -> str:
        return (
            f"TwoTypeDigraph(kind={self.kind}, k={self.k}, bits={len(self.bit_ids)}, "
            f"tests={len(self.test_ids)}, arcs={len(self.arcs)})"
        )


@dataclass(frozen=True)
class PlainDigraph:
    """
    Unweighted digraph on indices 0..n-1.

    `labels[i]` names where index i came from (a test id after a collapse,
    the original index after a deletion); None means the identity labelling.
    """

    n: int
    arcs: FrozenSet[Tuple[int, int]]
    labels: Optional[Tuple[Hashable, ...]] = None

    def __post_init__(self) -> None:
        arcs = frozenset((int(a), int(b)) for a, b in self.arcs)
        object.__setattr__(self, "arcs", arcs)
        if self.n < 0:
            raise InvalidGraph(f"Vertex count must be nonnegative, got {self.n}")
        for a, b in arcs:
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise InvalidGraph(f"Arc ({a}, {b}) out of range for n={self.n}")
            if a == b:
                raise InvalidGraph(f"Self-loop at {a}")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.n:
                raise InvalidGraph(f"{len(labels)} labels for {self.n} vertices")
            if labels == tuple(range(self.n)):
                labels = None
            object.__setattr__(self, "labels", labels)

    @property
    def ids(self) -> Tuple[int, ...]:
        return tuple(range(self.n))

    def label(self, index: int) -> Hashable:
        return index if self.labels is None else self.labels[index]

    def index_of(self, label: Hashable) -> int:
        if self.labels is None:
            if isinstance(label, int) and 0 <= label < self.n:
                return label
            raise UnknownVertex(f"No vertex labelled {label!r}")
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownVertex(f"No vertex labelled {label!r}") from None

    @cached_property
    def nx_graph(self) -> nx.DiGraph:
        """Read-only networkx view; arcs are inserted in sorted order."""
        return _as_networkx(self.ids, self.arcs)

    @cached_property
    def successors(self) -> Dict[int, Tuple[int, ...]]:
        return {v: tuple(sorted(self.nx_graph.successors(v))) for v in self.ids}

    @cached_property
    def predecessors(self) -> Dict[int, Tuple[int, ...]]:
        return {v: tuple(sorted(self.nx_graph.predecessors(v))) for v in self.ids}

    def summary(self) -> str:
        return f"PlainDigraph(n={self.n}, arcs={len(self.arcs)})"


AnyDigraph = Union[PlainDigraph, TwoTypeDigraph]


def _as_networkx(ids: Iterable[Hashable], arcs: Iterable[Tuple[Hashable, Hashable]]) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(ids)
    graph.add_edges_from(sorted(arcs))
    return graph


@dataclass(frozen=True)
class TopologicalSortResult:
    """Either a topological order or a directed cycle witness."""

    order: Optional[Tuple[Hashable, ...]] = None
    cycle: Optional[Tuple[Hashable, ...]] = None

    @property
    def acyclic(self) -> bool:
        return self.order is not None


def topological_sort(g: AnyDigraph) -> TopologicalSortResult:
    """
    Kahn's method, always releasing the smallest available id.

    :param g: A plain or two-type digraph
    :return: The order if g is acyclic, otherwise a cycle whose consecutive
             vertices (and last-to-first) are joined by arcs, rotated to
             start at its smallest id
    """
    graph = g.nx_graph
    try:
        return TopologicalSortResult(order=tuple(nx.lexicographical_topological_sort(graph)))
    except nx.NetworkXUnfeasible:
        pass
    cycle = [tail for tail, _ in nx.find_cycle(graph)]
    start = cycle.index(min(cycle))
    return TopologicalSortResult(cycle=tuple(cycle[start:] + cycle[:start]))


def is_acyclic(g: AnyDigraph) -> bool:
    return nx.is_directed_acyclic_graph(g.nx_graph)


@dataclass(frozen=True)
class LongestPath:
    count: int
    witness: Tuple[Hashable, ...]


class _End:
    """Virtual source or sink added around a graph for the longest-path search."""

    def __init__(self, name: str) -> None:
        self.name = name

    def __repr__(self) -> str:
        return self.name


def longest_path_vertices(g: AnyDigraph, restrict_to_role: Optional[str] = None) -> LongestPath:
    """
    Maximum number of (role-matching) vertices on a directed path.

    Vertex weights move onto the arcs entering each vertex, and a virtual
    source and sink are wired in after the real arcs. networkx then keeps
    the first best predecessor, so the smallest id wins among equally good
    predecessors and among equally good end points.

    :param g: An acyclic digraph
    :param restrict_to_role: Count only bit or only test vertices
    :raises CyclicInput: If g has a directed cycle
    """
    if restrict_to_role is not None:
        if not isinstance(g, TwoTypeDigraph):
            raise ParamError("Role restriction needs a two-type graph")
        if restrict_to_role not in ROLES:
            raise ParamError(f"Unknown role {restrict_to_role!r}")
    result = topological_sort(g)
    if not result.acyclic:
        raise CyclicInput(f"Graph has a cycle through {list(result.cycle)}")
    if not result.order:
        return LongestPath(count=0, witness=())

    def weight(v: Hashable) -> int:
        if restrict_to_role is None:
            return 1
        return 1 if g.vertex(v).role == restrict_to_role else 0

    source, sink = _End("source"), _End("sink")
    ids = sorted(result.order)
    weighted = nx.DiGraph()
    weighted.add_nodes_from([source, *ids, sink])
    weighted.add_weighted_edges_from((a, b, weight(b)) for a, b in sorted(g.arcs))
    weighted.add_weighted_edges_from((source, v, weight(v)) for v in ids)
    # +1 keeps the sink strictly ahead of every real end point
    weighted.add_weighted_edges_from((v, sink, 1) for v in ids)
    path = nx.dag_longest_path(weighted, topo_order=[source, *result.order, sink])
    witness = tuple(path[1:-1])
    return LongestPath(count=sum(weight(v) for v in witness), witness=witness)


def delete_vertices(g: AnyDigraph, deleted: Iterable[Hashable]) -> AnyDigraph:
    """
    Induced subgraph on the vertices not in `deleted`.

    Two-type graphs keep ids and refuse to delete bit vertices. Plain graphs
    are re-indexed in increasing order and keep their labels.

    :raises BitDeletion: If a bit vertex is listed
    :raises UnknownVertex: If a listed vertex does not exist
    """
    deleted = set(deleted)
    if isinstance(g, TwoTypeDigraph):
        for vertex_id in sorted(deleted):
            if g.vertex(vertex_id).role == BIT:
                raise BitDeletion(f"Bit vertex {vertex_id} cannot be deleted")
        if not deleted:
            return g
        kept = [v for v in g.vertices if v.id not in deleted]
        return TwoTypeDigraph(
            vertices=tuple(kept),
            arcs=frozenset(g.nx_graph.subgraph(v.id for v in kept).edges),
            k=g.k,
            kind=g.kind,
            provenance=g.provenance,
        )

    for index in deleted:
        if not (isinstance(index, int) and 0 <= index < g.n):
            raise UnknownVertex(f"No vertex {index!r} in a graph on {g.n} vertices")
    kept = [i for i in range(g.n) if i not in deleted]
    renumbered = nx.relabel_nodes(g.nx_graph.subgraph(kept), {old: new for new, old in enumerate(kept)})
    return PlainDigraph(
        n=len(kept),
        arcs=frozenset(renumbered.edges),
        labels=tuple(g.label(i) for i in kept),
    )


def induced_two_type(g: TwoTypeDigraph, surviving_tests: Iterable[str]) -> TwoTypeDigraph:
    """Subgraph on all bit vertices plus the surviving test vertices."""
    survivors = set(surviving_tests)
    for vertex_id in survivors:
        if g.vertex(vertex_id).role != TEST:
            raise UnknownVertex(f"{vertex_id} is not a test vertex")
    return delete_vertices(g, [t for t in g.test_ids if t not in survivors])


def collapse_bit_vertices(g: TwoTypeDigraph) -> PlainDigraph:
    """
    Replace every test -> bit -> test two-arc path by a test -> test arc.

    The result's labels map collapsed indices back to test ids.

    :raises InvalidGraph: If some test reaches itself through one bit vertex
    """
    tests = g.test_ids
    index = {t: i for i, t in enumerate(tests)}
    arcs = set()
    for t in tests:
        for b in g.successors[t]:
            if g.vertex(b).role != BIT:
                continue
            for head in g.successors[b]:
                if head not in index:
                    continue
                if head == t:
                    raise InvalidGraph(f"Test {t} reaches itself through bit {b}")
                arcs.add((index[t], index[head]))
    return PlainDigraph(n=len(tests), arcs=frozenset(arcs), labels=tests)


def identify_layers(g: TwoTypeDigraph) -> TwoTypeDigraph:
    """
    Identify the copies of every bit and test vertex across layers.

    Ids are rebuilt without the layer component and arcs are unioned.
    """
    if not g.layered:
        raise ParamError(f"Graph kind {g.kind} is not layered")
    renamed: Dict[str, Vertex] = {}
    for vertex in g.vertices:
        if vertex.role == BIT:
            x, w = vertex.payload
            flat = make_bit_vertex(x, g.k, None, w)
        else:
            x, seq, v, slots = vertex.payload
            flat = make_test_vertex(x, seq, g.k, None, v, slots)
        renamed[vertex.id] = flat
    vertices = sorted({v.id: v for v in renamed.values()}.values(), key=lambda v: v.id)
    arcs = frozenset((renamed[a].id, renamed[b].id) for a, b in g.arcs)
    return TwoTypeDigraph(
        vertices=tuple(vertices),
        arcs=arcs,
        k=g.k,
        kind=FLAT_KIND_OF[g.kind],
        provenance=g.provenance,
    )
