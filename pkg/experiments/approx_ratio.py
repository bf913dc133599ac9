import itertools
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from experiments.experiment_base import BaseExperiment, Row
from models.digraph import PlainDigraph, delete_vertices, longest_path_vertices
from tools.solvers import SolverBudget, brute_force_dvd, dvd_k_approx

logger = logging.getLogger(__name__)


def random_dag(rng: np.random.Generator, max_n: int, density: float = 0.5) -> PlainDigraph:
    """Random DAG on 1..max_n vertices with arcs only from smaller to larger index."""
    n = int(rng.integers(1, max_n + 1))
    candidates = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(candidates)) < density
    return PlainDigraph(n=n, arcs=frozenset(arc for arc, chosen in zip(candidates, keep) if chosen))


def compare(g: PlainDigraph, k: int, budget: SolverBudget) -> Dict[str, Any]:
    approx = dvd_k_approx(g, k)
    opt = brute_force_dvd(g, k, budget)
    valid = longest_path_vertices(delete_vertices(g, approx)).count < k
    return {"approx": len(approx), "opt": len(opt), "valid": valid, "within": len(approx) <= k * len(opt)}


class ApproxRatioExperiment(BaseExperiment[Dict[str, Any]]):
    """
    Disjoint-path k-approximation against the exact DVD optimum on seeded random DAGs.
    """

    name = "approx-ratio"
    defaults = {"count": 100, "max_n": 10, "k": [2, 3, 4]}

    def compute(self, params: Dict[str, Any], seed: Optional[int]) -> Tuple[List[Row], Dict[str, Any]]:
        ks = params["k"]
        budget = SolverBudget(max_subsets=self.settings.budget, max_n=max(self.settings.max_n, params["max_n"]))
        children = np.random.SeedSequence(seed if seed is not None else 0).spawn(params["count"])
        graphs = [random_dag(np.random.default_rng(child), params["max_n"]) for child in children]

        outcomes: Dict[Tuple[int, int], Dict[str, Any]] = {}
        with ThreadPoolExecutor(max_workers=self.settings.workers) as executor:
            futures = {
                executor.submit(compare, g, k, budget): (k, index) for k in ks for index, g in enumerate(graphs)
            }
            for future in as_completed(futures):
                outcomes[futures[future]] = future.result()

        rows = []
        for k in ks:
            results = [outcomes[(k, index)] for index in range(len(graphs))]
            ratios = [Fraction(r["approx"], r["opt"]) for r in results if r["opt"]]
            rows.append(
                {
                    "k": k,
                    "instances": len(results),
                    "valid": sum(r["valid"] for r in results),
                    "within_bound": sum(r["within"] for r in results),
                    "max_ratio": max(ratios) if ratios else Fraction(0),
                    "mean_ratio": sum(ratios, Fraction(0)) / len(ratios) if ratios else Fraction(0),
                }
            )
        return rows, {
            "all_valid": all(row["valid"] == row["instances"] for row in rows),
            "all_within_bound": all(row["within_bound"] == row["instances"] for row in rows),
        }


ApproxRatioExperiment.register()
