"""
Unique Games instances: a regular bipartite multigraph (V, W, E) over the
label set [R], each edge carrying a permutation pi_{v,w} of [R].

A labeling rho satisfies edge (v, w) when rho(v) = pi_{v,w}(rho(w)).
"""

import hashlib
import itertools
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from utils.config import DEFAULT_BUDGET
from utils.errors import BudgetExceeded, InfeasibleDegrees, InvalidInstance, PartialLabeling
from utils.logging import log_function

logger = logging.getLogger(__name__)

Labeling = Dict[str, int]
GENERATOR_KINDS = ("satisfiable", "random")


@dataclass(frozen=True)
class Edge:
    v: str
    w: str
    perm: Tuple[int, ...]

    def satisfied(self, rho: Mapping[str, int]) -> bool:
        return rho[self.v] == self.perm[rho[self.w]]


@dataclass(frozen=True)
class UniqueGamesInstance:
    """
    :param V: Left vertex ids
    :param W: Right vertex ids
    :param R: Number of labels
    :param edges: Edges in a fixed order; parallel edges are allowed
    :param planted: Labeling the generator planted, if any
    """

    V: Tuple[str, ...]
    W: Tuple[str, ...]
    R: int
    edges: Tuple[Edge, ...]
    planted: Optional[Mapping[str, int]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "V", tuple(self.V))
        object.__setattr__(self, "W", tuple(self.W))
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.R < 1:
            raise InvalidInstance(f"R must be positive, got {self.R}")
        if not self.edges:
            raise InvalidInstance("An instance needs at least one edge")
        if set(self.V) & set(self.W) or len(set(self.V)) != len(self.V) or len(set(self.W)) != len(self.W):
            raise InvalidInstance("V and W must be disjoint lists of distinct ids")
        left, right = set(self.V), set(self.W)
        for e in self.edges:
            if e.v not in left or e.w not in right:
                raise InvalidInstance(f"Edge ({e.v}, {e.w}) is not a V-W edge")
            if sorted(e.perm) != list(range(self.R)):
                raise InvalidInstance(f"Edge ({e.v}, {e.w}) carries {list(e.perm)}, not a permutation of [{self.R}]")
        degree_v = Counter(e.v for e in self.edges)
        degree_w = Counter(e.w for e in self.edges)
        if len({degree_v[v] for v in self.V}) != 1 or len({degree_w[w] for w in self.W}) != 1:
            raise InvalidInstance("The bipartite graph is not regular")
        if self.planted is not None:
            check_total(self, self.planted)

    @property
    def deg(self) -> int:
        """Degree of every v in V."""
        return len(self.edges) // len(self.V)

    @cached_property
    def edges_at(self) -> Dict[str, Tuple[int, ...]]:
        """Edge indices incident to each vertex, in edge order."""
        incident: Dict[str, List[int]] = {u: [] for u in self.V + self.W}
        for index, e in enumerate(self.edges):
            incident[e.v].append(index)
            incident[e.w].append(index)
        return {u: tuple(indices) for u, indices in incident.items()}

    def summary(self) -> str:
        return f"UniqueGamesInstance(|V|={len(self.V)}, |W|={len(self.W)}, R={self.R}, |E|={len(self.edges)})"


def check_total(instance: UniqueGamesInstance, rho: Mapping[str, int]) -> None:
    for u in instance.V + instance.W:
        if u not in rho:
            raise PartialLabeling(f"No label for {u}")
        if not 0 <= rho[u] < instance.R:
            raise PartialLabeling(f"Label {rho[u]} of {u} outside [0, {instance.R})")


def evaluate_labeling(instance: UniqueGamesInstance, rho: Mapping[str, int]) -> Fraction:
    """Fraction of satisfied edges."""
    check_total(instance, rho)
    satisfied = sum(e.satisfied(rho) for e in instance.edges)
    return Fraction(satisfied, len(instance.edges))


def plurality_completion(instance: UniqueGamesInstance, rho_w: Mapping[str, int]) -> Labeling:
    """
    Extend a labeling of W to V: every v takes the most frequent label among
    pi_{v,w}(rho(w)) over its edges, smallest label on ties.
    """
    for w in instance.W:
        if w not in rho_w:
            raise PartialLabeling(f"No label for {w}")
    rho: Labeling = {w: int(rho_w[w]) for w in instance.W}
    for v in instance.V:
        votes = Counter(instance.edges[i].perm[rho[instance.edges[i].w]] for i in instance.edges_at[v])
        top = max(votes.values())
        rho[v] = min(label for label, count in votes.items() if count == top)
    return rho


@log_function(logger, level=logging.DEBUG)
def brute_force_opt(instance: UniqueGamesInstance, budget: int = DEFAULT_BUDGET) -> Tuple[Fraction, Labeling]:
    """
    Exact OPT by enumerating every labeling of W and completing V by plurality.

    The first labeling (in lexicographic order of W labels) reaching the
    maximum is returned.

    :raises BudgetExceeded: If R^|W| exceeds the budget
    """
    count = instance.R ** len(instance.W)
    if count > budget:
        raise BudgetExceeded(f"R^|W| = {count} labelings exceed the budget {budget}")
    best_value, best_rho = Fraction(-1), None
    for labels in itertools.product(range(instance.R), repeat=len(instance.W)):
        rho = plurality_completion(instance, dict(zip(instance.W, labels)))
        value = evaluate_labeling(instance, rho)
        if value > best_value:
            best_value, best_rho = value, rho
            if value == 1:
                break
    return best_value, best_rho


def _pair_stubs(n_v: int, n_w: int, deg: int, rng: np.random.Generator) -> List[Tuple[int, int]]:
    if n_v < 1 or n_w < 1 or deg < 1:
        raise InfeasibleDegrees(f"Need positive sizes and degree, got |V|={n_v}, |W|={n_w}, deg={deg}")
    if (n_v * deg) % n_w:
        raise InfeasibleDegrees(f"|V|*deg = {n_v * deg} is not divisible by |W| = {n_w}")
    deg_w = n_v * deg // n_w
    v_stubs = [v for v in range(n_v) for _ in range(deg)]
    w_stubs = np.array([w for w in range(n_w) for _ in range(deg_w)])
    rng.shuffle(w_stubs)
    return list(zip(v_stubs, (int(w) for w in w_stubs)))


def generate(
    kind: str, n_v: int, n_w: int, deg: int, R: int, seed: int
) -> UniqueGamesInstance:
    """
    Seeded deg-regular instance with |V| = n_v and |W| = n_w.

    Edges come from pairing degree stubs (a configuration model), so parallel
    edges may appear; they repeat one constraint. `satisfiable` plants a
    uniform labeling and draws each permutation uniformly among those it
    satisfies; `random` draws every permutation uniformly.

    :raises InfeasibleDegrees: If no deg-regular bipartite multigraph exists
    """
    if kind not in GENERATOR_KINDS:
        raise InvalidInstance(f"Unknown generator kind {kind!r}")
    if R < 1:
        raise InvalidInstance(f"R must be positive, got {R}")
    rng = np.random.default_rng(seed)
    V = tuple(f"v{i}" for i in range(n_v))
    W = tuple(f"w{i}" for i in range(n_w))
    pairs = _pair_stubs(n_v, n_w, deg, rng)

    planted = None
    if kind == "satisfiable":
        planted = {u: int(label) for u, label in zip(V + W, rng.integers(0, R, size=n_v + n_w))}

    edges = []
    # parallel copies of one (v, w) pair share their permutation
    drawn: Dict[Tuple[int, int], Tuple[int, ...]] = {}
    for v, w in pairs:
        if (v, w) not in drawn:
            perm = [int(p) for p in rng.permutation(R)]
            if planted is not None:
                # swap so that perm[rho(w)] = rho(v)
                want, at = planted[V[v]], planted[W[w]]
                j = perm.index(want)
                perm[j], perm[at] = perm[at], perm[j]
            drawn[(v, w)] = tuple(perm)
        edges.append(Edge(v=V[v], w=W[w], perm=drawn[(v, w)]))
    instance = UniqueGamesInstance(V=V, W=W, R=R, edges=tuple(edges), planted=planted)
    logger.debug(f"Generated {instance.summary()} ({kind}, seed={seed})")
    return instance


def canonical_payload(instance: UniqueGamesInstance) -> Dict:
    """Plain-JSON view of the instance, without the planted labeling."""
    return {
        "R": instance.R,
        "V": list(instance.V),
        "W": list(instance.W),
        "edges": [{"v": e.v, "w": e.w, "perm": list(e.perm)} for e in instance.edges],
    }


def instance_hash(instance: UniqueGamesInstance) -> str:
    """sha256 of the canonical JSON encoding."""
    text = json.dumps(canonical_payload(instance), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def instance_from_payload(payload: Mapping, planted: Optional[Mapping[str, int]] = None) -> UniqueGamesInstance:
    try:
        edges = tuple(Edge(v=e["v"], w=e["w"], perm=tuple(int(p) for p in e["perm"])) for e in payload["edges"])
        return UniqueGamesInstance(
            V=tuple(payload["V"]), W=tuple(payload["W"]), R=int(payload["R"]), edges=edges, planted=planted
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInstance(f"Malformed instance payload: {exc}") from None


def random_labeling(instance: UniqueGamesInstance, rng: np.random.Generator) -> Labeling:
    labels = rng.integers(0, instance.R, size=len(instance.V) + len(instance.W))
    return {u: int(label) for u, label in zip(instance.V + instance.W, labels)}


def has_conflicting_parallel_edges(instance: UniqueGamesInstance) -> bool:
    """True if two edges join the same (v, w) with different permutations."""
    seen: Dict[Tuple[str, str], Tuple[int, ...]] = {}
    for e in instance.edges:
        if seen.setdefault((e.v, e.w), e.perm) != e.perm:
            return True
    return False
