"""
Dictatorship gadgets for FVS and DVD, their completeness witnesses, and the
decoders that read a function back from a solution.

An FVS gadget has one bit vertex per point z of [k]^R and one test vertex per
pair (x, S) with S in [R]^s_len. Arcs run b_z -> t_{x,S} for z in C_{x,S} and
t_{x,S} -> b_z for z in the shifted cube. The DVD gadget repeats bits on
layers 0..L and tests on layers 0..L-1 and keeps only arcs that respect the
layering, which makes it acyclic.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from models.boolfn import (
    Subcube,
    TableFunction,
    degree_influence,
    point_index,
    points,
    subcube_points,
    top_coordinate,
)
from models.digraph import (
    BIT,
    TEST,
    TwoTypeDigraph,
    Vertex,
    collapse_bit_vertices,
    delete_vertices,
    id_for_bit,
    induced_two_type,
    is_acyclic,
    longest_path_vertices,
    make_bit_vertex,
    make_test_vertex,
    topological_sort,
)
from utils.config import DEFAULT_BUDGET
from utils.errors import (
    BudgetExceeded,
    CyclicSurvivor,
    InconsistentInput,
    InconsistentWitness,
    IndexOutOfRange,
    ParamError,
)
from utils.logging import log_function

logger = logging.getLogger(__name__)

FVS_GADGET = "fvs-gadget"
DVD_GADGET = "dvd-gadget"


@dataclass(frozen=True)
class GadgetParams:
    """
    :param k: Alphabet size
    :param R: Number of coordinates
    :param s_len: Length of the index sequence S. With s_len >= R a sequence
        may cover every coordinate; such a test reaches itself through a
        bit, which the two-type graph keeps but a collapse refuses
    :param L: Number of test layers (DVD only)
    """

    k: int
    R: int
    s_len: int
    L: Optional[int] = None

    def __post_init__(self) -> None:
        if self.k < 2 or self.R < 2 or self.s_len < 1:
            raise ParamError(f"Need k >= 2, R >= 2, s_len >= 1, got {self.as_dict()}")
        if self.L is not None and self.L < 2:
            raise ParamError(f"L must be at least 2, got {self.L}")

    @property
    def test_count(self) -> int:
        return self.k**self.R * self.R**self.s_len * (self.L or 1)

    @property
    def bit_count(self) -> int:
        return self.k**self.R * ((self.L + 1) if self.L else 1)

    def check_budget(self, budget: int) -> None:
        if self.k**self.R * self.R**self.s_len > budget or self.test_count + self.bit_count > budget:
            raise BudgetExceeded(
                f"Gadget with k={self.k}, R={self.R}, s_len={self.s_len}, L={self.L} exceeds the budget {budget}"
            )

    def as_dict(self) -> Dict[str, Any]:
        return {"k": self.k, "R": self.R, "s_len": self.s_len, "L": self.L}


def sequences(R: int, s_len: int) -> Iterable[Tuple[int, ...]]:
    return itertools.product(range(R), repeat=s_len)


def _advisory(p: GadgetParams) -> Dict[str, Any]:
    # the asymptotic layer-count condition delta*L >= |T|^(1-delta), reported only
    return {"tests_per_layer": p.k**p.R * p.R**p.s_len, "layers": p.L}


@log_function(logger)
def build_fvs_gadget(p: GadgetParams, budget: int = DEFAULT_BUDGET) -> TwoTypeDigraph:
    """
    :param p: Gadget parameters without layers
    :param budget: Largest allowed table / vertex count
    :return: The FVS gadget, kind "fvs-gadget"
    :raises BudgetExceeded: If the gadget is too large to enumerate
    """
    if p.L is not None:
        raise ParamError("The FVS gadget has no layers")
    p.check_budget(budget)
    vertices: List[Vertex] = [make_bit_vertex(z, p.k) for z in points(p.k, p.R)]
    arcs = set()
    for x in points(p.k, p.R):
        for seq in sequences(p.R, p.s_len):
            test = make_test_vertex(x, seq, p.k)
            vertices.append(test)
            for z in subcube_points(Subcube(x, seq, p.k)):
                arcs.add((id_for_bit(z, p.k), test.id))
            for z in subcube_points(Subcube(x, seq, p.k, shifted=True)):
                arcs.add((test.id, id_for_bit(z, p.k)))
    return TwoTypeDigraph(
        vertices=tuple(sorted(vertices, key=lambda v: v.id)),
        arcs=frozenset(arcs),
        k=p.k,
        kind=FVS_GADGET,
        provenance={"params": p.as_dict()},
    )


@log_function(logger)
def build_dvd_gadget(p: GadgetParams, budget: int = DEFAULT_BUDGET) -> TwoTypeDigraph:
    """
    Layered gadget: arcs b^l -> t^l' need l <= l', arcs t^l' -> b^l need l > l'.
    """
    if p.L is None:
        raise ParamError("The DVD gadget needs a layer count L")
    p.check_budget(budget)
    vertices: List[Vertex] = [
        make_bit_vertex(z, p.k, layer) for layer in range(p.L + 1) for z in points(p.k, p.R)
    ]
    arcs = set()
    for x in points(p.k, p.R):
        for seq in sequences(p.R, p.s_len):
            inside = subcube_points(Subcube(x, seq, p.k))
            shifted = subcube_points(Subcube(x, seq, p.k, shifted=True))
            for test_layer in range(p.L):
                test = make_test_vertex(x, seq, p.k, test_layer)
                vertices.append(test)
                for bit_layer in range(p.L + 1):
                    if bit_layer <= test_layer:
                        arcs.update((id_for_bit(z, p.k, bit_layer), test.id) for z in inside)
                    else:
                        arcs.update((test.id, id_for_bit(z, p.k, bit_layer)) for z in shifted)
    return TwoTypeDigraph(
        vertices=tuple(sorted(vertices, key=lambda v: v.id)),
        arcs=frozenset(arcs),
        k=p.k,
        kind=DVD_GADGET,
        provenance={"params": p.as_dict(), "advisory": _advisory(p)},
    )


def build_gadget(p: GadgetParams, budget: int = DEFAULT_BUDGET) -> TwoTypeDigraph:
    if p.L is None:
        return build_fvs_gadget(p, budget)
    return build_dvd_gadget(p, budget)


@dataclass(frozen=True)
class PartitionWitness:
    """
    A split of the test vertices into a discarded part T' and k classes.

    `s` is the dictator coordinate for gadget witnesses; reduction witnesses
    carry the labeling instead.
    """

    prime: FrozenSet[str]
    classes: Tuple[FrozenSet[str], ...]
    kind: str
    params: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)
    s: Optional[int] = None
    labeling: Optional[Mapping[str, int]] = field(default=None, compare=False, hash=False)

    def summary(self) -> str:
        sizes = ",".join(str(len(c)) for c in self.classes)
        return f"PartitionWitness(kind={self.kind}, prime={len(self.prime)}, classes=[{sizes}])"


def _gadget_params(g: TwoTypeDigraph) -> Dict[str, Any]:
    try:
        return dict(g.provenance["params"])
    except KeyError:
        raise ParamError(f"Graph of kind {g.kind} carries no construction parameters") from None


def dictator_partition(g: TwoTypeDigraph, s: int) -> PartitionWitness:
    """
    T' = tests whose sequence contains s; T_j = the other tests with x_s = j.

    Layered gadgets are split the same way on every layer.
    """
    if g.kind not in (FVS_GADGET, DVD_GADGET):
        raise ParamError(f"Dictator partitions apply to gadgets, not {g.kind}")
    params = _gadget_params(g)
    if not 0 <= s < params["R"]:
        raise IndexOutOfRange(f"Dictator coordinate {s} outside [0, {params['R']})")
    prime, classes = set(), [set() for _ in range(g.k)]
    for t in g.test_ids:
        x, seq = g.vertex(t).payload[:2]
        if s in seq:
            prime.add(t)
        else:
            classes[x[s]].add(t)
    return PartitionWitness(
        prime=frozenset(prime),
        classes=tuple(frozenset(c) for c in classes),
        kind=g.kind,
        params=params,
        s=s,
    )


def check_witness(g: TwoTypeDigraph, w: PartitionWitness) -> None:
    """
    :raises InconsistentWitness: Unless prime and classes partition the tests
                                 into k equal-sized classes
    """
    if len(w.classes) != g.k:
        raise InconsistentWitness(f"Expected {g.k} classes, got {len(w.classes)}")
    seen: Dict[str, str] = {}
    for name, part in [("prime", w.prime)] + [(f"T_{j}", c) for j, c in enumerate(w.classes)]:
        for t in part:
            if t not in g or g.vertex(t).role != TEST:
                raise InconsistentWitness(f"{name} lists {t}, which is not a test vertex")
            if t in seen:
                raise InconsistentWitness(f"{t} appears in both {seen[t]} and {name}")
            seen[t] = name
    missing = len(g.test_ids) - len(seen)
    if missing:
        raise InconsistentWitness(f"{missing} test vertices are in no part of the witness")
    sizes = {len(c) for c in w.classes}
    if len(sizes) != 1:
        raise InconsistentWitness(f"Classes have unequal sizes {sorted(len(c) for c in w.classes)}")


@dataclass(frozen=True)
class CompletenessReport:
    ok: bool
    detail: Dict[str, Any]


def infer_mode(g: TwoTypeDigraph) -> str:
    return "dvd" if g.layered else "fvs"


@log_function(logger)
def verify_completeness(
    g: TwoTypeDigraph, w: PartitionWitness, j: int, mode: Optional[str] = None
) -> CompletenessReport:
    """
    Delete T' and T_j and check the remainder.

    fvs mode checks acyclicity; dvd mode checks that no path through k test
    vertices survives. An acyclic remainder is also collapsed, and the
    detail records whether the collapse has no arcs at all.

    :raises InconsistentWitness: If w does not partition the tests of g
    """
    check_witness(g, w)
    if not 0 <= j < g.k:
        raise IndexOutOfRange(f"Class {j} outside [0, {g.k})")
    mode = mode or infer_mode(g)
    if mode not in ("fvs", "dvd"):
        raise ParamError(f"Unknown mode {mode!r}")
    deleted = w.prime | w.classes[j]
    remainder = delete_vertices(g, deleted)
    acyclic = is_acyclic(remainder)
    # a cyclic remainder may hold a test that reaches itself, which no collapse expresses
    collapsed = collapse_bit_vertices(remainder) if acyclic else None
    detail: Dict[str, Any] = {
        "mode": mode,
        "class": j,
        "deleted": len(deleted),
        "remaining_tests": len(remainder.test_ids),
        "collapsed_arcs": len(collapsed.arcs) if collapsed is not None else None,
        "arcless": collapsed is not None and not collapsed.arcs,
        "acyclic": acyclic,
    }
    if mode == "fvs":
        ok = acyclic
    else:
        longest = longest_path_vertices(collapsed).count if acyclic else None
        detail["longest_test_path"] = longest
        detail["threshold"] = g.k
        ok = acyclic and longest < g.k
    return CompletenessReport(ok=ok, detail=detail)


@dataclass(frozen=True)
class SplitDecoding:
    """
    f_A with its influence profile and the forced-constancy fractions over
    the surviving tests.
    """

    f_A: TableFunction
    influences: Dict[int, Fraction]
    top: Tuple[int, Fraction]
    zero_fraction: Fraction
    one_fraction: Fraction
    either_fraction: Fraction
    degree: int

    def summary(self) -> str:
        return f"SplitDecoding(top={self.top[0]}, value={self.top[1]})"


def ordered_bits(induced: TwoTypeDigraph) -> List[str]:
    """
    Bit vertices in the deterministic topological order of `induced`.

    :raises CyclicSurvivor: If the graph has a cycle
    """
    result = topological_sort(induced)
    if not result.acyclic:
        raise CyclicSurvivor(f"Surviving tests close the cycle {list(result.cycle)}")
    return [v for v in result.order if induced.vertex(v).role == BIT]


def split_indicator(bit_order: Sequence[str], g: TwoTypeDigraph, R: int) -> TableFunction:
    """Indicator of the last ceil(count/2) bits of the order, as a function of x."""
    cut = len(bit_order) - math.ceil(len(bit_order) / 2)
    values = [0] * g.k**R
    for b in bit_order[cut:]:
        values[point_index(g.vertex(b).x, g.k)] = 1
    return TableFunction(k=g.k, R=R, values=tuple(values))


def _fraction(hits: int, total: int) -> Fraction:
    return Fraction(hits, total) if total else Fraction(1)


@log_function(logger)
def decode_topological_split(
    g: TwoTypeDigraph, surviving_tests: Iterable[str], d: Optional[int] = None
) -> SplitDecoding:
    """
    Read a function from an acyclic survivor set of an FVS gadget.

    :param g: FVS gadget
    :param surviving_tests: Test ids left after deletion
    :param d: Degree cutoff of the reported influences; defaults to R
    :raises CyclicSurvivor: If the survivors leave a cycle
    """
    if g.kind != FVS_GADGET:
        raise ParamError(f"Topological split decoding needs an FVS gadget, got {g.kind}")
    R = _gadget_params(g)["R"]
    d = R if d is None else d
    survivors = sorted(set(surviving_tests))
    induced = induced_two_type(g, survivors)
    f_A = split_indicator(ordered_bits(induced), g, R)
    influences = {i: degree_influence(f_A, i, d) for i in range(R)}

    zero = one = either = 0
    for t in survivors:
        x, seq = g.vertex(t).payload[:2]
        is_zero = all(f_A(z) == 0 for z in subcube_points(Subcube(x, seq, g.k)))
        is_one = all(f_A(z) == 1 for z in subcube_points(Subcube(x, seq, g.k, shifted=True)))
        zero += is_zero
        one += is_one
        either += is_zero or is_one
    return SplitDecoding(
        f_A=f_A,
        influences=influences,
        top=top_coordinate(influences),
        zero_fraction=_fraction(zero, len(survivors)),
        one_fraction=_fraction(one, len(survivors)),
        either_fraction=_fraction(either, len(survivors)),
        degree=d,
    )


def _delete_sample(g: TwoTypeDigraph, size: int, seed_seq: np.random.SeedSequence) -> bool:
    rng = np.random.default_rng(seed_seq)
    chosen = rng.choice(len(g.test_ids), size=size, replace=False)
    remainder = delete_vertices(g, [g.test_ids[i] for i in chosen])
    return not is_acyclic(remainder)


@log_function(logger)
def random_deletion_probe(
    g: TwoTypeDigraph, fraction: Fraction, trials: int, seed: int, workers: int = 1
) -> int:
    """
    Delete a uniformly random `fraction` of the tests `trials` times and
    count how often a cycle survives.
    """
    if not 0 <= fraction <= 1:
        raise ParamError(f"fraction must lie in [0, 1], got {fraction}")
    size = round(Fraction(fraction) * len(g.test_ids))
    children = np.random.SeedSequence(seed).spawn(trials)
    cyclic = 0
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = [executor.submit(_delete_sample, g, size, child) for child in children]
        for future in as_completed(futures):
            cyclic += future.result()
    return cyclic


LayerKey = Tuple[Optional[str], int]


def _column(vertex: Vertex) -> Tuple[Tuple[int, ...], Optional[str]]:
    x, w = vertex.payload
    return x, w


def coloring_from_deletion(g: TwoTypeDigraph, deleted: Iterable[str]) -> Dict[str, int]:
    """
    Color each bit vertex 1 + the largest number of tests on a surviving
    path ending at it.
    """
    if not g.layered:
        raise ParamError(f"Colorings apply to layered graphs, not {g.kind}")
    remainder = delete_vertices(g, deleted)
    order = topological_sort(remainder).order
    tests_ending_at: Dict[str, int] = {}
    for v in order:
        before = max((tests_ending_at[u] for u in remainder.predecessors[v]), default=0)
        tests_ending_at[v] = before + (1 if remainder.vertex(v).role == TEST else 0)
    return {b: 1 + tests_ending_at[b] for b in g.bit_ids}


def check_coloring(g: TwoTypeDigraph, coloring: Mapping[str, int]) -> None:
    """
    :raises InconsistentInput: Unless every bit has a positive color and colors
                               never drop from one layer to the next
    """
    bits = set(g.bit_ids)
    extra = set(coloring) - bits
    if extra:
        raise InconsistentInput(f"Coloring names non-bit vertices {sorted(extra)[:5]}")
    columns: Dict[Tuple, List[Tuple[int, int]]] = {}
    for b in g.bit_ids:
        if b not in coloring:
            raise InconsistentInput(f"Bit {b} has no color")
        color = coloring[b]
        if not isinstance(color, int) or color < 1:
            raise InconsistentInput(f"Bit {b} has color {color!r}; colors are positive integers")
        columns.setdefault(_column(g.vertex(b)), []).append((g.vertex(b).layer, color))
    for column, entries in columns.items():
        colors = [c for _, c in sorted(entries)]
        if any(a > b for a, b in zip(colors, colors[1:])):
            raise InconsistentInput(f"Colors of column {column} decrease across layers: {colors}")


def unsatisfied_tests(g: TwoTypeDigraph, coloring: Mapping[str, int]) -> FrozenSet[str]:
    """Tests whose largest predecessor color is not below their smallest successor color."""
    bad = set()
    for t in g.test_ids:
        highest_in = max((coloring[b] for b in g.predecessors[t]), default=0)
        lowest_out = min((coloring[b] for b in g.successors[t]), default=math.inf)
        if highest_in >= lowest_out:
            bad.add(t)
    return frozenset(bad)


def deletion_from_coloring(g: TwoTypeDigraph, coloring: Mapping[str, int]) -> FrozenSet[str]:
    check_coloring(g, coloring)
    return unsatisfied_tests(g, coloring)


def layer_colors(g: TwoTypeDigraph, coloring: Mapping[str, int], delta: Fraction) -> Dict[LayerKey, int]:
    """
    chi(w, l): the largest c with Pr_x[color(b^l_{w,x}) >= c] >= 1 - delta.

    Plain gadgets use w = None.
    """
    if not 0 <= delta < 1:
        raise ParamError(f"delta must lie in [0, 1), got {delta}")
    groups: Dict[LayerKey, List[int]] = {}
    for b in g.bit_ids:
        vertex = g.vertex(b)
        groups.setdefault((vertex.payload[1], vertex.layer), []).append(coloring[b])
    result = {}
    for key, colors in groups.items():
        best = 1
        for c in sorted(set(colors)):
            if Fraction(sum(1 for value in colors if value >= c), len(colors)) >= 1 - delta:
                best = max(best, c)
        result[key] = best
    return dict(sorted(result.items(), key=lambda item: (item[0][0] or "", item[0][1])))


@dataclass(frozen=True)
class RoundtripReport:
    deleted: FrozenSet[str]
    coloring: Dict[str, int]
    colors_used: int
    satisfied_by_layer: Dict[int, Fraction]
    layer_colors: Dict[LayerKey, int]

    def summary(self) -> str:
        return f"RoundtripReport(deleted={len(self.deleted)}, colors_used={self.colors_used})"


@log_function(logger)
def coloring_roundtrip(
    g: TwoTypeDigraph,
    deleted: Optional[Iterable[str]] = None,
    coloring: Optional[Mapping[str, int]] = None,
    delta: Fraction = Fraction(0),
) -> RoundtripReport:
    """
    Turn a deletion set into a layer coloring or a coloring into the set of
    tests it leaves unsatisfied. Exactly one of the two must be given.

    :raises InconsistentInput: If the given object does not fit g
    """
    if (deleted is None) == (coloring is None):
        raise ParamError("Give exactly one of a deletion set or a coloring")
    if deleted is not None:
        deleted = frozenset(deleted)
        for t in deleted:
            if t not in g or g.vertex(t).role != TEST:
                raise InconsistentInput(f"{t} is not a test vertex of the graph")
        coloring = coloring_from_deletion(g, deleted)
    else:
        coloring = dict(coloring)
        deleted = deletion_from_coloring(g, coloring)
    unsatisfied = unsatisfied_tests(g, coloring)
    by_layer: Dict[int, List[bool]] = {}
    for t in g.test_ids:
        by_layer.setdefault(g.vertex(t).layer, []).append(t not in unsatisfied)
    return RoundtripReport(
        deleted=deleted,
        coloring=coloring,
        colors_used=len(set(coloring.values())),
        satisfied_by_layer={layer: Fraction(sum(flags), len(flags)) for layer, flags in sorted(by_layer.items())},
        layer_colors=layer_colors(g, coloring, delta),
    )
