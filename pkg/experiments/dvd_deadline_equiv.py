import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from experiments.experiment_base import BaseExperiment, Row
from models.timecost import brute_force_deadline, dvd_to_deadline, enumerate_dags
from tools.solvers import SolverBudget, brute_force_dvd
from utils.logging import log_function
from utils.rationals import to_fraction

logger = logging.getLogger(__name__)


def sweep(n: int, k: int, gamma: Optional[Fraction], budget: int) -> Row:
    """Compare both brute forces on every topologically ordered DAG on n vertices."""
    dags = equal = 0
    mismatches = []
    solver_budget = SolverBudget(max_subsets=budget, max_n=max(n, 1))
    for g in enumerate_dags(n):
        dags += 1
        dvd = len(brute_force_dvd(g, k, solver_budget))
        cost, _ = brute_force_deadline(dvd_to_deadline(g, k, gamma), budget)
        if cost == dvd:
            equal += 1
        elif len(mismatches) < 5:
            mismatches.append(sorted(g.arcs))
    return {"n": n, "k": k, "dags": dags, "equal": equal, "all_equal": equal == dags, "mismatches": mismatches}


class DvdDeadlineEquivExperiment(BaseExperiment[Dict[str, Any]]):
    """
    Minimum Deadline cost against minimum DVD size on every small topologically ordered DAG.
    """

    name = "dvd-deadline-equiv"
    defaults = {"max_n": 4, "k": [2], "gamma": None}

    @log_function(logger)
    def compute(self, params: Dict[str, Any], seed: Optional[int]) -> Tuple[List[Row], Dict[str, Any]]:
        gamma = to_fraction(params["gamma"]) if params["gamma"] is not None else None
        ks = params["k"]
        tasks = [(n, k) for k in ks for n in range(1, params["max_n"] + 1)]
        rows = []
        with ThreadPoolExecutor(max_workers=self.settings.workers) as executor:
            futures = {executor.submit(sweep, n, k, gamma, self.settings.budget): (n, k) for n, k in tasks}
            for future in as_completed(futures):
                rows.append(future.result())
                n, k = futures[future]
                logger.debug(f"Finished n={n}, k={k}")
        rows.sort(key=lambda row: (row["k"], row["n"]))
        return rows, {
            "dags": sum(row["dags"] for row in rows),
            "all_equal": all(row["all_equal"] for row in rows),
        }


DvdDeadlineEquivExperiment.register()
