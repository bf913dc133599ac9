import itertools
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from experiments.experiment_base import BaseExperiment, Row
from models.boolfn import (
    booleanize,
    dictator_zero_probability,
    joint_subcube_zero_probability,
    make_dictator,
    permuted_subcube_points,
    points,
)
from utils.errors import ParamError


def _enumerated_joint(fs, perms, k: int, R: int, s_len: int) -> Fraction:
    """Pr over (x, S) that every f_j vanishes on its permuted cube C_{x,S,pi_j}."""
    hits = total = 0
    for x in points(k, R):
        for seq in itertools.product(range(R), repeat=s_len):
            total += 1
            hits += all(
                all(f(z) == 0 for z in permuted_subcube_points(x, seq, perm, k)) for f, perm in zip(fs, perms)
            )
    return Fraction(hits, total)


class SubcubeJointExperiment(BaseExperiment[Dict[str, Any]]):
    """
    Joint subcube probability of permuted dictator families, consistent against inconsistent.
    """

    name = "subcube-joint"
    defaults = {"k": 2, "R": 4, "slen": 1, "functions": 2}

    def compute(self, params: Dict[str, Any], seed: Optional[int]) -> Tuple[List[Row], Dict[str, Any]]:
        k, R, s_len, m = params["k"], params["R"], params["slen"], params["functions"]
        if not 2 <= m <= R:
            raise ParamError(f"functions must lie in [2, R={R}], got {m}")
        rng = np.random.default_rng(seed if seed is not None else 0)
        perms = [tuple(int(p) for p in rng.permutation(R)) for _ in range(m)]
        targets = [int(c) for c in rng.permutation(R)[:m]]

        families = {
            # f_j o pi_j all read coordinate targets[0]
            "consistent": [perm.index(targets[0]) for perm in perms],
            "inconsistent": [perm.index(c) for perm, c in zip(perms, targets)],
        }
        single = dictator_zero_probability(k, R, s_len)
        rows = []
        for family, coordinates in families.items():
            fs = [booleanize(make_dictator(k, R, s)) for s in coordinates]
            joint = joint_subcube_zero_probability(fs, s_len, perms)
            rows.append(
                {
                    "family": family,
                    "coordinates": coordinates,
                    "probability": joint,
                    "permuted_cubes": _enumerated_joint(fs, perms, k, R, s_len),
                    "single_dictator": single,
                }
            )
        consistent, inconsistent = rows[0]["probability"], rows[1]["probability"]
        return rows, {
            "consistent_matches_single": consistent == single,
            "inconsistent_below_single": inconsistent < single,
        }


SubcubeJointExperiment.register()
