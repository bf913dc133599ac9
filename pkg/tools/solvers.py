"""
Exact FVS and DVD oracles by subset enumeration, and the disjoint-path
k-approximation for DVD.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Iterator, Optional, Tuple

from models.digraph import PlainDigraph, delete_vertices, is_acyclic, longest_path_vertices, topological_sort
from utils.config import DEFAULT_BUDGET, DEFAULT_MAX_N
from utils.errors import BudgetExceeded, CyclicInput, ParamError
from utils.logging import log_function

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverBudget:
    """
    :param max_subsets: Most subsets the enumeration may test
    :param max_n: Largest vertex count accepted
    """

    max_subsets: int = DEFAULT_BUDGET
    max_n: int = DEFAULT_MAX_N

    def __post_init__(self) -> None:
        if self.max_subsets < 1 or self.max_n < 1:
            raise ParamError(f"Solver budget must be positive, got {self}")

    def check(self, g: PlainDigraph) -> None:
        if g.n > self.max_n:
            raise BudgetExceeded(f"Exact solvers accept at most {self.max_n} vertices, got {g.n}")


def _subsets_by_size(n: int) -> Iterator[Tuple[int, ...]]:
    """All subsets of 0..n-1, smallest first, lexicographic within a size."""
    for size in range(n + 1):
        yield from itertools.combinations(range(n), size)


def _search(g: PlainDigraph, budget: SolverBudget, valid) -> FrozenSet[int]:
    budget.check(g)
    tried = 0
    for subset in _subsets_by_size(g.n):
        tried += 1
        if tried > budget.max_subsets:
            raise BudgetExceeded(f"More than {budget.max_subsets} subsets examined")
        if valid(delete_vertices(g, subset)):
            return frozenset(g.label(i) for i in subset)
    raise AssertionError("Deleting every vertex is always valid")


def has_k_path(g: PlainDigraph, k: int) -> bool:
    return longest_path_vertices(g).count >= k


@log_function(logger, level=logging.DEBUG)
def brute_force_fvs(g: PlainDigraph, budget: SolverBudget = SolverBudget()) -> FrozenSet[int]:
    """
    Minimum feedback vertex set, lexicographically smallest among the minima.

    :raises BudgetExceeded: If g is larger than the budget allows
    """
    return _search(g, budget, is_acyclic)


@log_function(logger, level=logging.DEBUG)
def brute_force_dvd(g: PlainDigraph, k: int, budget: SolverBudget = SolverBudget()) -> FrozenSet[int]:
    """
    Minimum set whose deletion leaves no path through k vertices.

    :raises CyclicInput: If g has a cycle
    :raises BudgetExceeded: If g is larger than the budget allows
    """
    if k < 2:
        raise ParamError(f"k must be at least 2, got {k}")
    _require_dag(g)
    return _search(g, budget, lambda remainder: not has_k_path(remainder, k))


def _require_dag(g: PlainDigraph) -> None:
    result = topological_sort(g)
    if not result.acyclic:
        raise CyclicInput(f"Graph has a cycle through {list(result.cycle)}")


@log_function(logger, level=logging.DEBUG)
def dvd_k_approx(g: PlainDigraph, k: int) -> FrozenSet[int]:
    """
    Delete the first k vertices of the longest-path witness until no path
    through k vertices is left.

    The deleted paths are vertex-disjoint and each meets every optimal
    solution, so the output has at most k times the optimal size.

    :raises CyclicInput: If g has a cycle
    """
    if k < 2:
        raise ParamError(f"k must be at least 2, got {k}")
    _require_dag(g)
    deleted = set()
    remainder = g
    while True:
        path = longest_path_vertices(remainder)
        if path.count < k:
            return frozenset(deleted)
        chosen = path.witness[:k]
        deleted.update(remainder.label(i) for i in chosen)
        remainder = delete_vertices(remainder, chosen)


def approximation_ratio(approx: FrozenSet[int], opt: FrozenSet[int]) -> Optional[Fraction]:
    """|approx| / |opt|, or None when the optimum is empty."""
    if not opt:
        return None
    return Fraction(len(approx), len(opt))
