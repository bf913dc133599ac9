"""
JSON codecs for every hforge file format, plus DOT export.

Each encoder returns a plain dict; `dumps` renders it with sorted keys so
equal inputs give byte-identical files. Decoders validate the payload with
the matching pydantic model in formats.schemas before rebuilding the object.
"""

import json
import logging
import sys
from fractions import Fraction
from typing import Any, Dict, Hashable, List, Mapping, Optional, Union

from pydantic import BaseModel, ValidationError

from formats.schemas import (
    DEADLINE_FORMAT,
    DOCUMENTS,
    GRAPH_FORMAT,
    PLAIN_KIND,
    REALIZATION_FORMAT,
    REPORT_FORMAT,
    UG_FORMAT,
    WITNESS_FORMAT,
    GraphDocument,
    VertexEntry,
)
from models.digraph import BIT, PlainDigraph, TwoTypeDigraph, make_bit_vertex, make_test_vertex
from models.timecost import Activity, DeadlineInstance, MenuEntry
from models.unique_games import UniqueGamesInstance, canonical_payload, instance_from_payload
from tools.gadget import PartitionWitness
from utils.errors import FormatError, HForgeError
from utils.rationals import format_fraction, to_fraction

logger = logging.getLogger(__name__)


def error_location(loc: tuple) -> str:
    """("choice", "m0") -> "$.choice.m0"; list positions render as [i]."""
    return "$" + "".join(f"[{part}]" if isinstance(part, int) else f".{part}" for part in loc)


def _validated(payload: Any, fmt: str) -> BaseModel:
    if not isinstance(payload, dict) or payload.get("format") != fmt:
        found = payload.get("format") if isinstance(payload, dict) else type(payload).__name__
        raise FormatError(f"Expected a {fmt} document, got {found!r}")
    try:
        return DOCUMENTS[fmt].model_validate(payload)
    except ValidationError as exc:
        first = exc.errors()[0]
        more = f" (and {exc.error_count() - 1} more)" if exc.error_count() > 1 else ""
        raise FormatError(f"{fmt} {error_location(first['loc'])}: {first['msg']}{more}") from None


def to_jsonable(value: Any) -> Any:
    """Fractions become "p/q"; tuples, sets and frozensets become lists."""
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(value)]
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def dumps(payload: Mapping[str, Any]) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


def write_document(payload: Mapping[str, Any], path: Optional[str] = None) -> None:
    """Write to `path`, or to stdout when no path is given."""
    text = dumps(payload)
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    logger.info(f"Wrote {payload.get('format', 'document')} to {path}")


def read_document(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise FormatError(f"Cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON: {exc}") from None


# graphs


def encode_graph(g: Union[TwoTypeDigraph, PlainDigraph]) -> Dict[str, Any]:
    if isinstance(g, PlainDigraph):
        payload = {"format": GRAPH_FORMAT, "kind": PLAIN_KIND, "n": g.n, "arcs": sorted(g.arcs)}
        if g.labels is not None:
            payload["labels"] = list(g.labels)
        return payload
    vertices = []
    for vertex in g.vertices:
        entry: Dict[str, Any] = {"id": vertex.id, "role": vertex.role, "layer": vertex.layer, "x": list(vertex.x)}
        if vertex.role == BIT:
            entry["w"] = vertex.payload[1]
        else:
            _, seq, v, slots = vertex.payload
            entry.update({"S": list(seq), "v": v, "slots": [list(s) for s in slots] if slots is not None else None})
        vertices.append(entry)
    return {
        "format": GRAPH_FORMAT,
        "kind": g.kind,
        "k": g.k,
        "vertices": vertices,
        "arcs": sorted(g.arcs),
        "provenance": dict(g.provenance),
    }


def _decode_vertex(entry: VertexEntry, k: int):
    if entry.role == BIT:
        return make_bit_vertex(entry.x, k, entry.layer, entry.w)
    slots = tuple(entry.slots) if entry.slots is not None else None
    return make_test_vertex(entry.x, entry.S, k, entry.layer, entry.v, slots)


def decode_graph(payload: Any) -> Union[TwoTypeDigraph, PlainDigraph]:
    doc: GraphDocument = _validated(payload, GRAPH_FORMAT)
    try:
        if doc.kind == PLAIN_KIND:
            return PlainDigraph(
                n=doc.n,
                arcs=frozenset((a, b) for a, b in doc.arcs),
                labels=tuple(doc.labels) if doc.labels is not None else None,
            )
        return TwoTypeDigraph(
            vertices=tuple(_decode_vertex(entry, doc.k) for entry in doc.vertices),
            arcs=frozenset((a, b) for a, b in doc.arcs),
            k=doc.k,
            kind=doc.kind,
            provenance=doc.provenance,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, HForgeError):
            raise
        raise FormatError(f"Malformed graph document: {exc}") from None


# unique games


def encode_ug(instance: UniqueGamesInstance) -> Dict[str, Any]:
    payload = {"format": UG_FORMAT, **canonical_payload(instance)}
    if instance.planted is not None:
        payload["planted"] = dict(instance.planted)
    return payload


def decode_ug(payload: Any) -> UniqueGamesInstance:
    doc = _validated(payload, UG_FORMAT)
    return instance_from_payload(doc.model_dump(exclude={"planted"}), planted=doc.planted)


# deadline


def encode_deadline(inst: DeadlineInstance) -> Dict[str, Any]:
    payload = {
        "format": DEADLINE_FORMAT,
        "activities": [
            {"id": a.id, "menu": [{"duration": e.duration, "cost": e.cost} for e in a.menu]}
            for a in inst.activities
        ],
        "precedence": sorted(inst.precedence),
        "deadline": inst.deadline,
    }
    if inst.provenance:
        payload["provenance"] = dict(inst.provenance)
    return to_jsonable(payload)


def decode_deadline(payload: Any) -> DeadlineInstance:
    doc = _validated(payload, DEADLINE_FORMAT)
    activities = tuple(
        Activity(id=a.id, menu=tuple(MenuEntry(e.duration, e.cost) for e in a.menu)) for a in doc.activities
    )
    provenance = dict(doc.provenance)
    if "gamma" in provenance:
        provenance["gamma"] = to_fraction(provenance["gamma"])
    if "arcs" in provenance:
        provenance["arcs"] = [tuple(a) for a in provenance["arcs"]]
    return DeadlineInstance(
        activities=activities,
        precedence=frozenset(doc.precedence),
        deadline=doc.deadline,
        provenance=provenance,
    )


# witnesses and realizations


def encode_witness(w: PartitionWitness) -> Dict[str, Any]:
    payload = {
        "format": WITNESS_FORMAT,
        "kind": w.kind,
        "params": dict(w.params),
        "prime": sorted(w.prime),
        "classes": [sorted(c) for c in w.classes],
        "s": w.s,
    }
    if w.labeling is not None:
        payload["labeling"] = dict(w.labeling)
    return payload


def decode_witness(payload: Any) -> PartitionWitness:
    doc = _validated(payload, WITNESS_FORMAT)
    return PartitionWitness(
        prime=frozenset(doc.prime),
        classes=tuple(frozenset(c) for c in doc.classes),
        kind=doc.kind,
        params=doc.params,
        s=doc.s,
        labeling=doc.labeling,
    )


def encode_realization(choice: Mapping[str, int]) -> Dict[str, Any]:
    return {"format": REALIZATION_FORMAT, "choice": dict(choice)}


def decode_realization(payload: Any) -> Dict[str, int]:
    return dict(_validated(payload, REALIZATION_FORMAT).choice)


def check_report(payload: Any) -> Dict[str, Any]:
    """:raises FormatError: Unless payload is a well-formed report document"""
    _validated(payload, REPORT_FORMAT)
    return payload


# DOT


def _quote(name: Hashable) -> str:
    return '"' + str(name).replace('"', '\\"') + '"'


def export_dot(g: Union[TwoTypeDigraph, PlainDigraph]) -> str:
    """Graphviz text; bit vertices are boxes and test vertices ellipses."""
    lines: List[str] = ["digraph hforge {"]
    if isinstance(g, PlainDigraph):
        for i in g.ids:
            lines.append(f"  {i} [label={_quote(g.label(i))}];")
        for a, b in sorted(g.arcs):
            lines.append(f"  {a} -> {b};")
    else:
        for vertex in g.vertices:
            shape = "box" if vertex.role == BIT else "ellipse"
            lines.append(f"  {_quote(vertex.id)} [shape={shape}];")
        for a, b in sorted(g.arcs):
            lines.append(f"  {_quote(a)} -> {_quote(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
