from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from experiments.experiment_base import BaseExperiment, Row
from tools.gadget import GadgetParams, build_fvs_gadget, random_deletion_probe
from utils.rationals import to_fraction


class FvsDeletionProbeExperiment(BaseExperiment[Dict[str, Any]]):
    """
    Random test deletions on an FVS gadget: how often does a cycle survive.
    """

    name = "fvs-deletion-probe"
    defaults = {"k": 2, "R": 3, "slen": 1, "fraction": "1/2", "trials": 100}

    def compute(self, params: Dict[str, Any], seed: Optional[int]) -> Tuple[List[Row], Dict[str, Any]]:
        fraction = to_fraction(params["fraction"])
        g = build_fvs_gadget(GadgetParams(k=params["k"], R=params["R"], s_len=params["slen"]), self.settings.budget)
        cyclic = random_deletion_probe(
            g, fraction, params["trials"], seed if seed is not None else 0, workers=self.settings.workers
        )
        row = {
            "tests": len(g.test_ids),
            "deleted": round(fraction * len(g.test_ids)),
            "trials": params["trials"],
            "cyclic": cyclic,
            "cyclic_fraction": Fraction(cyclic, params["trials"]),
        }
        return [row], {"cyclic_fraction": row["cyclic_fraction"]}


FvsDeletionProbeExperiment.register()
