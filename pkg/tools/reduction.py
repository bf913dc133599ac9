"""
Reductions from Unique Games to FVS and DVD.

Every w in W becomes a k-ary hypercube of bit vertices b_{w,z}. For each v,
each tuple of 2t edges at v and each (x, S) there is a test vertex reading
the cube of every slot edge through its permutation: arcs b_{w,z} -> t for z
in C_{x,S,v,w} and t -> b_{w,z} for z in the shifted cube.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from models.boolfn import TableFunction, degree_influence, permuted_subcube_points, point_index, points
from models.digraph import (
    BIT,
    TwoTypeDigraph,
    Vertex,
    collapse_bit_vertices,
    delete_vertices,
    id_for_bit,
    induced_two_type,
    longest_path_vertices,
    make_bit_vertex,
    make_test_vertex,
    topological_sort,
)
from models.unique_games import (
    Labeling,
    UniqueGamesInstance,
    canonical_payload,
    check_total,
    evaluate_labeling,
    has_conflicting_parallel_edges,
    instance_from_payload,
    instance_hash,
    plurality_completion,
)
from tools.gadget import (
    CompletenessReport,
    PartitionWitness,
    coloring_from_deletion,
    layer_colors,
    sequences,
    split_indicator,
    verify_completeness,
)
from utils.config import DEFAULT_BUDGET
from utils.errors import BudgetExceeded, CyclicSurvivor, InvalidInstance, ParamError
from utils.logging import log_function

logger = logging.getLogger(__name__)

UG_FVS = "ug-fvs"
UG_DVD = "ug-dvd"

Slot = Tuple[str, int]


@dataclass(frozen=True)
class ReductionParams:
    """
    :param k: Alphabet size of the hypercubes
    :param s_len: Length of the index sequence S
    :param t: Each test reads 2t edges at its v
    :param L: Number of test layers (DVD only)
    """

    k: int
    s_len: int
    t: int
    L: Optional[int] = None

    def __post_init__(self) -> None:
        if self.k < 2 or self.s_len < 1:
            raise ParamError(f"Need k >= 2 and s_len >= 1, got k={self.k}, s_len={self.s_len}")
        if self.t < 1:
            raise ParamError(f"t must be at least 1 (2t >= 2 neighbour slots), got {self.t}")
        if self.L is not None and self.L < 2:
            raise ParamError(f"L must be at least 2, got {self.L}")

    def check(self, instance: UniqueGamesInstance, budget: int) -> None:
        tests = len(instance.V) * instance.deg ** (2 * self.t) * self.k**instance.R * instance.R**self.s_len
        tests *= self.L or 1
        if tests > budget:
            raise BudgetExceeded(f"The reduction would build {tests} test vertices, over the budget {budget}")
        if has_conflicting_parallel_edges(instance):
            raise InvalidInstance("Parallel edges with different permutations let a test reach itself")

    def as_dict(self, R: int) -> Dict[str, Any]:
        return {"k": self.k, "s_len": self.s_len, "t": self.t, "L": self.L, "R": R}


@dataclass(frozen=True)
class DecoderParams:
    """
    :param d: Degree cutoff for influences
    :param eta: Influence threshold for candidate labels
    :param trials: Number of randomized labelings tried
    :param seed: Seed of the randomized labelings
    """

    d: int = 1
    eta: Fraction = Fraction(1, 8)
    trials: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "eta", Fraction(self.eta))
        if self.d < 1:
            raise ParamError(f"d must be at least 1, got {self.d}")
        if not 0 < self.eta <= 1:
            raise ParamError(f"eta must lie in (0, 1], got {self.eta}")
        if self.trials < 1:
            raise ParamError(f"trials must be positive, got {self.trials}")


def _slot_tuples(instance: UniqueGamesInstance, v: str, t: int) -> Iterable[Tuple[Slot, ...]]:
    incident = instance.edges_at[v]
    for chosen in itertools.product(incident, repeat=2 * t):
        yield tuple((instance.edges[e].w, e) for e in chosen)


def _build(instance: UniqueGamesInstance, p: ReductionParams, budget: int, kind: str) -> TwoTypeDigraph:
    p.check(instance, budget)
    k, R = p.k, instance.R
    layers = range(p.L) if p.L else [None]
    bit_layers = list(range(p.L + 1)) if p.L else [None]
    vertices: List[Vertex] = [
        make_bit_vertex(z, k, layer, w) for layer in bit_layers for w in instance.W for z in points(k, R)
    ]
    arcs = set()
    for v in instance.V:
        for slots in _slot_tuples(instance, v, p.t):
            slot_edges = sorted(set(e for _, e in slots))
            for x in points(k, R):
                for seq in sequences(R, p.s_len):
                    cubes = []
                    for e in slot_edges:
                        edge = instance.edges[e]
                        cubes.append(
                            (
                                edge.w,
                                permuted_subcube_points(x, seq, edge.perm, k),
                                permuted_subcube_points(x, seq, edge.perm, k, shifted=True),
                            )
                        )
                    for test_layer in layers:
                        test = make_test_vertex(x, seq, k, test_layer, v, slots)
                        vertices.append(test)
                        for w, inside, shifted in cubes:
                            for bit_layer in bit_layers:
                                if bit_layer is None or bit_layer <= test_layer:
                                    arcs.update((id_for_bit(z, k, bit_layer, w), test.id) for z in inside)
                                if bit_layer is None or bit_layer > test_layer:
                                    arcs.update((test.id, id_for_bit(z, k, bit_layer, w)) for z in shifted)
    provenance = {
        "params": p.as_dict(R),
        "ug": canonical_payload(instance),
        "ug_hash": instance_hash(instance),
    }
    return TwoTypeDigraph(
        vertices=tuple(sorted(vertices, key=lambda vertex: vertex.id)),
        arcs=frozenset(arcs),
        k=k,
        kind=kind,
        provenance=provenance,
    )


@log_function(logger)
def ug_to_fvs(instance: UniqueGamesInstance, p: ReductionParams, budget: int = DEFAULT_BUDGET) -> TwoTypeDigraph:
    """
    :raises ParamError: If p is invalid for the instance
    :raises BudgetExceeded: If the graph would be too large
    """
    if p.L is not None:
        raise ParamError("The FVS reduction has no layers")
    return _build(instance, p, budget, UG_FVS)


@log_function(logger)
def ug_to_dvd(instance: UniqueGamesInstance, p: ReductionParams, budget: int = DEFAULT_BUDGET) -> TwoTypeDigraph:
    """Layered variant of ug_to_fvs; acyclic by construction."""
    if p.L is None:
        raise ParamError("The DVD reduction needs a layer count L")
    return _build(instance, p, budget, UG_DVD)


def instance_of(g: TwoTypeDigraph) -> UniqueGamesInstance:
    """Rebuild the Unique Games instance a reduced graph was made from."""
    if g.kind not in (UG_FVS, UG_DVD):
        raise ParamError(f"Graph kind {g.kind} is not a reduction output")
    try:
        instance = instance_from_payload(g.provenance["ug"])
    except KeyError:
        raise InvalidInstance("Reduced graph carries no embedded instance") from None
    expected = g.provenance.get("ug_hash")
    if expected is not None and expected != instance_hash(instance):
        raise InvalidInstance("Embedded instance does not match its recorded hash")
    return instance


def _test_view(g: TwoTypeDigraph, test_id: str):
    x, seq, v, slots = g.vertex(test_id).payload
    return x, seq, v, slots


def is_good_test(instance: UniqueGamesInstance, rho: Mapping[str, int], seq: Sequence[int], v: str, slots) -> bool:
    """rho(v) outside S and every slot edge satisfied."""
    if rho[v] in seq:
        return False
    return all(instance.edges[e].satisfied(rho) for _, e in slots)


def completeness_bound(instance: UniqueGamesInstance, rho: Mapping[str, int], p: Mapping[str, Any]) -> Fraction:
    """Lower bound ((R-1)/R)^s_len * (1 - 2t*zeta) / k on each |T_j| / |T|."""
    zeta = 1 - evaluate_labeling(instance, rho)
    good = Fraction(instance.R - 1, instance.R) ** p["s_len"] * max(Fraction(0), 1 - 2 * p["t"] * zeta)
    return good / p["k"]


@dataclass(frozen=True)
class LabelingPartition:
    witness: PartitionWitness
    reports: Tuple[CompletenessReport, ...]
    class_fraction: Fraction
    bound: Fraction

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.reports)

    def summary(self) -> str:
        return f"LabelingPartition(ok={self.ok}, class_fraction={self.class_fraction}, bound={self.bound})"


@log_function(logger)
def partition_from_labeling(
    g: TwoTypeDigraph, rho: Mapping[str, int], instance: Optional[UniqueGamesInstance] = None
) -> LabelingPartition:
    """
    T_j = good tests with x_{rho(v)} = j, T' = every other test; each class
    is then verified by deletion.

    :raises PartialLabeling: If rho misses a vertex of the instance
    """
    instance = instance or instance_of(g)
    check_total(instance, rho)
    prime, classes = set(), [set() for _ in range(g.k)]
    for test_id in g.test_ids:
        x, seq, v, slots = _test_view(g, test_id)
        if is_good_test(instance, rho, seq, v, slots):
            classes[x[rho[v]]].add(test_id)
        else:
            prime.add(test_id)
    params = dict(g.provenance["params"])
    witness = PartitionWitness(
        prime=frozenset(prime),
        classes=tuple(frozenset(c) for c in classes),
        kind=g.kind,
        params=params,
        labeling=dict(rho),
    )
    reports = tuple(verify_completeness(g, witness, j) for j in range(g.k))
    total = len(g.test_ids)
    return LabelingPartition(
        witness=witness,
        reports=reports,
        class_fraction=Fraction(len(classes[0]), total) if total else Fraction(0),
        bound=completeness_bound(instance, rho, params),
    )


def _bits_by_key(order: Sequence[str], g: TwoTypeDigraph) -> Dict[Tuple[str, Optional[int]], List[str]]:
    grouped: Dict[Tuple[str, Optional[int]], List[str]] = {}
    for b in order:
        vertex = g.vertex(b)
        if vertex.role == BIT:
            grouped.setdefault((vertex.payload[1], vertex.layer), []).append(b)
    return grouped


def candidate_labels(f: TableFunction, d: int, eta: Fraction) -> List[int]:
    d = min(d, f.R)
    return [i for i in range(f.R) if degree_influence(f, i, d) >= eta]


def _random_completion(instance: UniqueGamesInstance, rho_w: Mapping[str, int], rng: np.random.Generator) -> Labeling:
    rho = dict(rho_w)
    for v in instance.V:
        incident = instance.edges_at[v]
        edge = instance.edges[incident[int(rng.integers(len(incident)))]]
        rho[v] = edge.perm[rho[edge.w]]
    return rho


@dataclass(frozen=True)
class LabelingTrial:
    rho: Labeling
    val: Fraction
    completion: str


def best_randomized_labeling(
    instance: UniqueGamesInstance, candidates: Mapping[str, Sequence[Sequence[int]]], dp: DecoderParams
) -> LabelingTrial:
    """
    Seeded randomized labelings: per trial pick a candidate list for each w
    uniformly, then a label from it (0 when empty), and complete V both
    through a random neighbour and by plurality. The best result wins,
    earliest trial first on ties.
    """
    best: Optional[LabelingTrial] = None
    for child in np.random.SeedSequence(dp.seed).spawn(dp.trials):
        rng = np.random.default_rng(child)
        rho_w = {}
        for w in instance.W:
            lists = candidates[w]
            chosen = lists[int(rng.integers(len(lists)))] if lists else []
            rho_w[w] = int(chosen[int(rng.integers(len(chosen)))]) if chosen else 0
        for name, rho in (
            ("neighbour", _random_completion(instance, rho_w, rng)),
            ("plurality", plurality_completion(instance, rho_w)),
        ):
            val = evaluate_labeling(instance, rho)
            if best is None or val > best.val:
                best = LabelingTrial(rho=rho, val=val, completion=name)
    return best


@dataclass(frozen=True)
class LabelingDecoding:
    """
    :param rho: Best labeling found
    :param val: Its value
    :param candidates: L[w] per w
    :param empty: The w whose candidate set was empty (labelled 0)
    :param diagnostics: Size bound check and constancy statistics
    """

    rho: Labeling
    val: Fraction
    candidates: Dict[str, List[int]]
    empty: Tuple[str, ...]
    diagnostics: Dict[str, Any]

    def summary(self) -> str:
        return f"LabelingDecoding(val={self.val}, empty={len(self.empty)})"


def _ordered_survivor_bits(g: TwoTypeDigraph, survivors: Sequence[str]) -> List[str]:
    induced = induced_two_type(g, survivors)
    result = topological_sort(induced)
    if not result.acyclic:
        raise CyclicSurvivor(f"Surviving tests close the cycle {list(result.cycle)}")
    return list(result.order)


def _constancy(
    g: TwoTypeDigraph, instance: UniqueGamesInstance, survivors: Sequence[str], functions: Mapping[str, TableFunction]
) -> Dict[str, Fraction]:
    zero = one = 0
    for test_id in survivors:
        x, seq, _, slots = _test_view(g, test_id)
        zero_all = one_all = True
        for e in sorted(set(e for _, e in slots)):
            edge = instance.edges[e]
            f = functions[edge.w]
            zero_all &= all(f(z) == 0 for z in permuted_subcube_points(x, seq, edge.perm, g.k))
            one_all &= all(f(z) == 1 for z in permuted_subcube_points(x, seq, edge.perm, g.k, shifted=True))
        zero += zero_all
        one += one_all
    total = len(survivors)
    return {
        "zero_fraction": Fraction(zero, total) if total else Fraction(1),
        "one_fraction": Fraction(one, total) if total else Fraction(1),
    }


@log_function(logger)
def decode_labeling(
    g: TwoTypeDigraph,
    surviving_tests: Iterable[str],
    dp: DecoderParams = DecoderParams(),
    instance: Optional[UniqueGamesInstance] = None,
) -> LabelingDecoding:
    """
    Read a labeling off an acyclic survivor set of a ug-fvs graph.

    f_w is 0 on the first half of w's bits in the topological order of the
    survivors and 1 on the rest; L[w] collects the coordinates of degree-d
    influence at least eta.

    :raises CyclicSurvivor: If the survivors leave a cycle
    """
    if g.kind != UG_FVS:
        raise ParamError(f"decode_labeling needs a {UG_FVS} graph, got {g.kind}")
    instance = instance or instance_of(g)
    survivors = sorted(set(surviving_tests))
    grouped = _bits_by_key(_ordered_survivor_bits(g, survivors), g)
    R = instance.R

    functions = {w: split_indicator(grouped[(w, None)], g, R) for w in instance.W}
    candidates = {w: candidate_labels(functions[w], dp.d, dp.eta) for w in instance.W}
    empty = tuple(w for w in instance.W if not candidates[w])
    if empty:
        logger.warning(f"No candidate label for {len(empty)} of {len(instance.W)} w; using label 0")
    best = best_randomized_labeling(instance, {w: [c] for w, c in candidates.items()}, dp)

    size_bound = Fraction(dp.d) / dp.eta
    diagnostics: Dict[str, Any] = {
        "candidate_bound": size_bound,
        "candidate_bound_holds": all(len(c) <= size_bound for c in candidates.values()),
        "completion": best.completion,
        "survivors": len(survivors),
    }
    diagnostics.update(_constancy(g, instance, survivors, functions))
    return LabelingDecoding(rho=best.rho, val=best.val, candidates=candidates, empty=empty, diagnostics=diagnostics)


def layer_function(
    g: TwoTypeDigraph, coloring: Mapping[str, int], chi: Mapping[Tuple[str, int], int], w: str, layer: int, R: int
) -> TableFunction:
    """f^l_w(x) = 0 when color(b^{l+1}_{w,x}) exceeds chi(w, l), else 1."""
    values = [0] * g.k**R
    for x in points(g.k, R):
        color = coloring[id_for_bit(x, g.k, layer + 1, w)]
        values[point_index(x, g.k)] = 0 if color > chi[(w, layer)] else 1
    return TableFunction(k=g.k, R=R, values=tuple(values))


@dataclass(frozen=True)
class LayeredDecoding:
    layer_colors: Dict[Tuple[str, int], int]
    rising_fraction: Fraction
    candidates: Dict[str, List[List[int]]]
    longest_test_path: int
    path_threshold: int
    best: LabelingTrial

    @property
    def path_reaches_threshold(self) -> bool:
        return self.longest_test_path >= self.path_threshold

    def summary(self) -> str:
        return (
            f"LayeredDecoding(rising={self.rising_fraction}, longest={self.longest_test_path}, "
            f"val={self.best.val})"
        )


@log_function(logger)
def decode_layered(
    g: TwoTypeDigraph,
    surviving_tests: Iterable[str],
    dp: DecoderParams = DecoderParams(),
    delta: Fraction = Fraction(1, 8),
    path_threshold: int = 2,
    instance: Optional[UniqueGamesInstance] = None,
) -> LayeredDecoding:
    """
    Diagnostics of a survivor set of a ug-dvd graph.

    Colors every bit by the longest surviving test path ending at it, takes
    the per-(w, layer) color chi at confidence 1 - delta, builds f^l_w from
    the next layer's colors and collects L^l[w]. Also measures the longest
    surviving test path against `path_threshold`.
    """
    if g.kind != UG_DVD:
        raise ParamError(f"decode_layered needs a {UG_DVD} graph, got {g.kind}")
    if path_threshold < 1:
        raise ParamError(f"path_threshold must be positive, got {path_threshold}")
    instance = instance or instance_of(g)
    survivors = set(surviving_tests)
    deleted = [t for t in g.test_ids if t not in survivors]
    coloring = coloring_from_deletion(g, deleted)
    chi = layer_colors(g, coloring, delta)
    L = g.provenance["params"]["L"]

    candidates: Dict[str, List[List[int]]] = {w: [] for w in instance.W}
    rising = 0
    for w in instance.W:
        for layer in range(L):
            rising += chi[(w, layer)] < chi[(w, layer + 1)]
            f = layer_function(g, coloring, chi, w, layer, instance.R)
            candidates[w].append(candidate_labels(f, dp.d, dp.eta))

    collapsed = collapse_bit_vertices(delete_vertices(g, deleted))
    longest = longest_path_vertices(collapsed).count
    return LayeredDecoding(
        layer_colors=chi,
        rising_fraction=Fraction(rising, len(instance.W) * L),
        candidates=candidates,
        longest_test_path=longest,
        path_threshold=path_threshold,
        best=best_randomized_labeling(instance, candidates, dp),
    )


def dictator_survivors(g: TwoTypeDigraph, rho: Mapping[str, int], j: int = 1) -> FrozenSet[str]:
    """The class T_j of the labeling partition, as a survivor set."""
    partition = partition_from_labeling(g, rho)
    return partition.witness.classes[j]
