"""
Discrete time-cost tradeoff (Deadline) instances and the reduction from DAG
vertex deletion.

Activities pick one (duration, cost) entry from a finite menu; the project
runs every activity as early as precedence allows and must finish by the
deadline.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from models.digraph import PlainDigraph, topological_sort
from utils.config import DEFAULT_BUDGET
from utils.errors import (
    BadGamma,
    BudgetExceeded,
    ForeignInstance,
    Infeasible,
    InvalidInstance,
    NotTopologicallyOrdered,
    ParamError,
)
from utils.logging import log_function

logger = logging.getLogger(__name__)

Realization = Dict[str, int]

# the cost-1 entry of m_i
PAID_ENTRY = 1
FREE_ENTRY = 0


@dataclass(frozen=True)
class MenuEntry:
    duration: Fraction
    cost: Fraction


@dataclass(frozen=True)
class Activity:
    id: str
    menu: Tuple[MenuEntry, ...]


@dataclass(frozen=True)
class DeadlineInstance:
    """
    :param activities: Activities in a fixed order
    :param precedence: Arcs (i, j) meaning i finishes before j starts
    :param deadline: Latest allowed makespan
    :param provenance: Where the instance came from; DVD reductions record
                       the source graph, k and gamma here
    """

    activities: Tuple[Activity, ...]
    precedence: FrozenSet[Tuple[str, str]]
    deadline: Fraction
    provenance: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "activities", tuple(self.activities))
        object.__setattr__(self, "precedence", frozenset(tuple(a) for a in self.precedence))
        object.__setattr__(self, "deadline", Fraction(self.deadline))
        ids = [a.id for a in self.activities]
        if len(set(ids)) != len(ids):
            raise InvalidInstance("Activity ids must be distinct")
        for activity in self.activities:
            if not activity.menu:
                raise InvalidInstance(f"Activity {activity.id} has an empty menu")
            for entry in activity.menu:
                if entry.duration < 0 or entry.cost < 0:
                    raise InvalidInstance(f"Activity {activity.id} has a negative menu entry")
            for a, b in itertools.permutations(activity.menu, 2):
                if a != b and a.duration <= b.duration and a.cost <= b.cost:
                    raise InvalidInstance(f"Activity {activity.id}: {b} is dominated by {a}")
        known = set(ids)
        for i, j in self.precedence:
            if i not in known or j not in known:
                raise InvalidInstance(f"Precedence ({i}, {j}) names an unknown activity")
        if not topological_sort(self.as_digraph()).acyclic:
            raise InvalidInstance("Precedence arcs contain a cycle")

    @cached_property
    def index(self) -> Dict[str, int]:
        return {a.id: n for n, a in enumerate(self.activities)}

    def as_digraph(self) -> PlainDigraph:
        index = {a.id: n for n, a in enumerate(self.activities)}
        return PlainDigraph(
            n=len(self.activities),
            arcs=frozenset((index[i], index[j]) for i, j in self.precedence),
            labels=tuple(a.id for a in self.activities),
        )

    @cached_property
    def order(self) -> Tuple[str, ...]:
        """Activity ids in a topological order of the precedence arcs."""
        result = topological_sort(self.as_digraph())
        return tuple(self.activities[n].id for n in result.order)

    @cached_property
    def predecessors(self) -> Dict[str, Tuple[str, ...]]:
        preds: Dict[str, List[str]] = {a.id: [] for a in self.activities}
        for i, j in self.precedence:
            preds[j].append(i)
        return {a: tuple(sorted(p)) for a, p in preds.items()}

    def summary(self) -> str:
        return f"DeadlineInstance(activities={len(self.activities)}, arcs={len(self.precedence)}, T={self.deadline})"


@dataclass(frozen=True)
class Schedule:
    start: Dict[str, Fraction]
    makespan: Fraction


def _check_realization(inst: DeadlineInstance, x: Mapping[str, int]) -> None:
    for activity in inst.activities:
        if activity.id not in x:
            raise InvalidInstance(f"Realization has no choice for {activity.id}")
        if not 0 <= x[activity.id] < len(activity.menu):
            raise InvalidInstance(f"Choice {x[activity.id]} outside the menu of {activity.id}")


def duration_of(inst: DeadlineInstance, x: Mapping[str, int], activity_id: str) -> Fraction:
    return inst.activities[inst.index[activity_id]].menu[x[activity_id]].duration


def earliest_schedule(inst: DeadlineInstance, x: Mapping[str, int]) -> Schedule:
    """
    Start every activity as soon as all its predecessors have finished.
    """
    _check_realization(inst, x)
    start: Dict[str, Fraction] = {}
    makespan = Fraction(0)
    for a in inst.order:
        start[a] = max(
            (start[p] + duration_of(inst, x, p) for p in inst.predecessors[a]),
            default=Fraction(0),
        )
        makespan = max(makespan, start[a] + duration_of(inst, x, a))
    return Schedule(start=start, makespan=makespan)


def realization_cost(inst: DeadlineInstance, x: Mapping[str, int]) -> Fraction:
    _check_realization(inst, x)
    return sum((a.menu[x[a.id]].cost for a in inst.activities), Fraction(0))


def is_feasible(inst: DeadlineInstance, x: Mapping[str, int]) -> bool:
    return earliest_schedule(inst, x).makespan <= inst.deadline


def default_gamma(k: int) -> Fraction:
    return Fraction(1, 20 * (k - 1))


def _slack(k: int) -> Fraction:
    return Fraction(1, 10 * (k - 1))


@log_function(logger, level=logging.DEBUG)
def dvd_to_deadline(g: PlainDigraph, k: int, gamma: Optional[Fraction] = None) -> DeadlineInstance:
    """
    Deadline instance whose cheapest feasible realization pays exactly a
    minimum DVD solution of g.

    Vertex i becomes l_i < m_i < r_i, where l_i pins m_i to start no earlier
    than i and r_i (length n-1-i+gamma) forces m_i to end by i+1-gamma. m_i
    costs 1 to shrink from 9/10 to 0. Arc (i, j) becomes m_i < a_(i,j) < m_j,
    which pushes m_j later by 1/(10(k-1)) whenever m_i is not paid, so a path
    of k unpaid vertices overruns the deadline n.

    :param g: DAG whose arcs all go from a smaller to a larger index
    :param k: Forbidden path length, at least 2
    :param gamma: Closure margin in (0, 1/(10(k-1))); defaults to 1/(20(k-1))
    :raises NotTopologicallyOrdered: If an arc (i, j) has i > j
    :raises BadGamma: If gamma is out of range
    """
    if k < 2:
        raise ParamError(f"k must be at least 2, got {k}")
    gamma = default_gamma(k) if gamma is None else Fraction(gamma)
    if not 0 < gamma < _slack(k):
        raise BadGamma(f"gamma={gamma} outside (0, {_slack(k)})")
    for i, j in sorted(g.arcs):
        if i > j:
            raise NotTopologicallyOrdered(f"Arc ({i}, {j}) goes backwards")
    n = g.n
    activities, precedence = [], set()
    for i in range(n):
        activities.append(Activity(f"l{i}", (MenuEntry(Fraction(i), Fraction(0)),)))
        activities.append(
            Activity(f"m{i}", (MenuEntry(Fraction(9, 10), Fraction(0)), MenuEntry(Fraction(0), Fraction(1))))
        )
        activities.append(Activity(f"r{i}", (MenuEntry(n - 1 - i + gamma, Fraction(0)),)))
        precedence |= {(f"l{i}", f"m{i}"), (f"m{i}", f"r{i}")}
    for i, j in sorted(g.arcs):
        duration = j - i - Fraction(9, 10) + _slack(k)
        activities.append(Activity(f"a{i}_{j}", (MenuEntry(duration, Fraction(0)),)))
        precedence |= {(f"m{i}", f"a{i}_{j}"), (f"a{i}_{j}", f"m{j}")}
    return DeadlineInstance(
        activities=tuple(activities),
        precedence=frozenset(precedence),
        deadline=Fraction(n),
        provenance={"source": "dvd", "n": n, "arcs": sorted(g.arcs), "k": k, "gamma": gamma},
    )


def _check_source(inst: DeadlineInstance, g: Optional[PlainDigraph] = None) -> int:
    prov = inst.provenance
    if prov.get("source") != "dvd":
        raise ForeignInstance("Instance was not produced by the DVD reduction")
    if g is not None and (prov.get("n") != g.n or [tuple(a) for a in prov.get("arcs", [])] != sorted(g.arcs)):
        raise ForeignInstance(f"Instance was built from a different graph than {g.summary()}")
    return prov["n"]


def realization_from_deletion(inst: DeadlineInstance, g: PlainDigraph, deleted: Iterable[int]) -> Realization:
    """Pay for m_i exactly when vertex i is deleted."""
    n = _check_source(inst, g)
    deleted = set(deleted)
    for i in deleted:
        if not 0 <= i < n:
            raise ForeignInstance(f"Vertex {i} does not exist in a graph on {n} vertices")
    x = {a.id: 0 for a in inst.activities}
    for i in deleted:
        x[f"m{i}"] = PAID_ENTRY
    return x


def deletion_from_realization(inst: DeadlineInstance, x: Mapping[str, int]) -> FrozenSet[int]:
    n = _check_source(inst)
    _check_realization(inst, x)
    return frozenset(i for i in range(n) if x[f"m{i}"] == PAID_ENTRY)


def _realizations(inst: DeadlineInstance) -> Iterator[Realization]:
    ids = [a.id for a in inst.activities]
    for choice in itertools.product(*(range(len(a.menu)) for a in inst.activities)):
        yield dict(zip(ids, choice))


@log_function(logger, level=logging.DEBUG)
def brute_force_deadline(inst: DeadlineInstance, budget: int = DEFAULT_BUDGET) -> Tuple[Fraction, Realization]:
    """
    Cheapest feasible realization by full enumeration.

    Realizations are visited in lexicographic order of menu indices, so the
    first cheapest one wins ties.

    :raises BudgetExceeded: If the product of menu sizes exceeds the budget
    :raises Infeasible: If no realization meets the deadline
    """
    total = 1
    for a in inst.activities:
        total *= len(a.menu)
    if total > budget:
        raise BudgetExceeded(f"{total} realizations exceed the budget {budget}")
    best_cost, best_x = None, None
    for x in _realizations(inst):
        cost = realization_cost(inst, x)
        if best_cost is not None and cost >= best_cost:
            continue
        if is_feasible(inst, x):
            best_cost, best_x = cost, x
    if best_x is None:
        raise Infeasible(f"No realization meets the deadline {inst.deadline}")
    return best_cost, best_x


def with_deadline(inst: DeadlineInstance, deadline: Fraction) -> DeadlineInstance:
    return DeadlineInstance(
        activities=inst.activities, precedence=inst.precedence, deadline=deadline, provenance=inst.provenance
    )


def enumerate_dags(n: int) -> Iterator[PlainDigraph]:
    """
    Every DAG on 0..n-1 whose arcs go from smaller to larger index, in order
    of the bitmask over the sorted candidate arcs.
    """
    candidates = list(itertools.combinations(range(n), 2))
    for mask in range(2 ** len(candidates)):
        arcs = frozenset(arc for bit, arc in enumerate(candidates) if mask >> bit & 1)
        yield PlainDigraph(n=n, arcs=arcs)


def path_durations(inst: DeadlineInstance, x: Mapping[str, int]) -> Sequence[Fraction]:
    """Total duration of every maximal precedence path, by explicit enumeration."""
    _check_realization(inst, x)
    successors: Dict[str, List[str]] = {a.id: [] for a in inst.activities}
    for i, j in inst.precedence:
        successors[i].append(j)
    sources = [a.id for a in inst.activities if not inst.predecessors[a.id]]
    totals = []

    def walk(a: str, acc: Fraction) -> None:
        acc += duration_of(inst, x, a)
        if not successors[a]:
            totals.append(acc)
        for b in sorted(successors[a]):
            walk(b, acc)

    for s in sources:
        walk(s, Fraction(0))
    return totals
