from typing import Any, Dict, List, Optional, Tuple

from experiments.experiment_base import BaseExperiment, Row
from models.boolfn import (
    TableFunction,
    booleanize,
    dictator_zero_probability,
    influence_table,
    make_dictator,
    make_majority,
    make_parity,
    make_random_boolean,
    subcube_zero_probability,
    top_coordinate,
)
from utils.errors import ParamError


def parse_function_spec(spec: str, k: int, R: int) -> TableFunction:
    """
    Build a 0/1 function from "dictator:<s>", "majority", "parity" or
    "random:<seed>". Dictators on k > 2 are read as the indicator x_s != 0.
    """
    name, _, arg = spec.partition(":")
    if name == "dictator":
        return booleanize(make_dictator(k, R, _int_arg(spec, arg)))
    if name in ("majority", "parity"):
        if k != 2:
            raise ParamError(f"{name} is defined on {{0,1}}^R only, got k={k}")
        return make_majority(R) if name == "majority" else make_parity(R)
    if name == "random":
        return make_random_boolean(k, R, _int_arg(spec, arg))
    raise ParamError(f"Unknown function {spec!r}")


def _int_arg(spec: str, arg: str) -> int:
    try:
        return int(arg)
    except ValueError:
        raise ParamError(f"{spec!r} needs an integer argument") from None


class SubcubeStatsExperiment(BaseExperiment[Dict[str, Any]]):
    """
    Probability that a function is identically 0 on a random subcube, per function, against the dictator closed form.
    """

    name = "subcube-stats"
    defaults = {"k": 2, "R": 5, "slen": 2, "fn": ["dictator:0"], "mode": "exact", "trials": 10_000}

    def compute(self, params: Dict[str, Any], seed: Optional[int]) -> Tuple[List[Row], Dict[str, Any]]:
        k, R, s_len = params["k"], params["R"], params["slen"]
        reference = dictator_zero_probability(k, R, s_len)
        rows = []
        for spec in params["fn"]:
            f = parse_function_spec(spec, k, R)
            probability = subcube_zero_probability(
                f,
                s_len,
                mode=params["mode"],
                seed=seed if seed is not None else 0,
                trials=params["trials"],
                workers=self.settings.workers,
            )
            top, value = top_coordinate(influence_table(f))
            rows.append(
                {
                    "function": spec,
                    "mean": f.mean(),
                    "probability": probability,
                    "dictator": reference,
                    "below_dictator": probability < reference,
                    "top_coordinate": top,
                    "top_influence": value,
                }
            )
        return rows, {"dictator": reference, "functions": len(rows)}


SubcubeStatsExperiment.register()
