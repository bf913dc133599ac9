import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Generic, List, Optional, Tuple, TypeVar

import pandas as pd

from experiments.experiment_registry import ExperimentRegistry
from formats.schemas import REPORT_FORMAT
from utils.config import Settings, load_settings
from utils.errors import ParamError
from utils.rationals import decimal_copy, format_fraction

logger = logging.getLogger(__name__)

ParamsT = TypeVar("ParamsT", bound=Dict[str, Any])

Row = Dict[str, Any]


@dataclass
class ExperimentReport:
    """
    Result of one experiment run.

    Everything except `timing` is a function of (command, params, seed).
    """

    command: str
    params: Dict[str, Any]
    seed: Optional[int]
    results: List[Row]
    summary: Dict[str, Any] = field(default_factory=dict)
    timing: Dict[str, float] = field(default_factory=dict)

    def to_payload(self) -> Dict[str, Any]:
        return {
            "format": REPORT_FORMAT,
            "command": self.command,
            "params": render_row(self.params),
            "seed": self.seed,
            "results": [render_row(row) for row in self.results],
            "summary": render_row(self.summary),
            "timing": self.timing,
        }

    def to_frame(self) -> pd.DataFrame:
        """Result rows as a DataFrame; rationals appear as "p/q" plus decimal copies."""
        return pd.DataFrame([render_row(row) for row in self.results])

    def write_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False)
        logger.info(f"Wrote {len(self.results)} result rows to {path}")

    def summary_line(self) -> str:
        return ", ".join(f"{k}={format_fraction(v) if isinstance(v, Fraction) else v}" for k, v in self.summary.items())


def render_row(row: Dict[str, Any]) -> Dict[str, Any]:
    """Render rationals as "p/q" and add a `<key>_decimal` display copy."""
    rendered: Dict[str, Any] = {}
    for key, value in row.items():
        if isinstance(value, Fraction):
            rendered[key] = format_fraction(value)
            rendered[f"{key}_decimal"] = decimal_copy(value)
        elif isinstance(value, (list, tuple)):
            rendered[key] = [format_fraction(v) if isinstance(v, Fraction) else v for v in value]
        else:
            rendered[key] = value
    return rendered


class BaseExperiment(ABC, Generic[ParamsT]):
    """
    Abstract base class for all experiments.
    Subclasses set `name` and `defaults` and implement `compute`.
    """

    name: str = ""
    defaults: Dict[str, Any] = {}

    def __init__(self, settings: Optional[Settings] = None) -> None:
        """
        :param settings: Process settings; read from the environment if omitted
        """
        self.settings = settings or load_settings()

    @classmethod
    def register(cls) -> None:
        """
        Register the experiment in the ExperimentRegistry under its name.
        The class docstring serves as its description.
        """
        if not cls.name:
            raise ValueError(f"{cls.__name__} has no name")
        ExperimentRegistry[cls.name] = cls

    @classmethod
    def description(cls) -> str:
        doc = cls.__doc__
        return doc.strip().splitlines()[0] if doc else "No description provided."

    def resolve(self, params: Dict[str, Any]) -> Dict[str, Any]:
        merged = dict(self.defaults)
        for key, value in params.items():
            if value is None:
                continue
            # a one-element list from the command line fills a scalar default
            if isinstance(value, list) and len(value) == 1 and not isinstance(merged.get(key), list):
                value = value[0]
            if isinstance(value, list) and merged.get(key) is not None and not isinstance(merged[key], list):
                raise ParamError(f"{self.name} takes a single value for {key}, got {value}")
            if isinstance(merged.get(key), list) and not isinstance(value, list):
                value = [value]
            merged[key] = value
        return merged

    def run(self, params: Dict[str, Any], seed: Optional[int] = None) -> ExperimentReport:
        """
        Resolve parameters against the defaults, compute and time the result.

        :param params: Experiment parameters; None values fall back to defaults
        :param seed: Seed for every random choice the experiment makes
        :return: The report
        """
        resolved = self.resolve(params)
        logger.info(f"Running experiment {self.name} with {resolved}")
        start = time.perf_counter()
        rows, summary = self.compute(resolved, seed)
        elapsed = time.perf_counter() - start
        return ExperimentReport(
            command=f"experiment {self.name}",
            params=resolved,
            seed=seed,
            results=rows,
            summary=summary,
            timing={"seconds": round(elapsed, 3)},
        )

    @abstractmethod
    def compute(self, params: ParamsT, seed: Optional[int]) -> Tuple[List[Row], Dict[str, Any]]:
        """
        :param params: Resolved parameters
        :param seed: Seed, possibly None for deterministic experiments
        :return: Result rows and a summary mapping
        """
        pass
