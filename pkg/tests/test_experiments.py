from fractions import Fraction

import pandas as pd
import pytest

from experiments import BaseExperiment, ExperimentRegistry
from experiments.subcube_stats import parse_function_spec
from formats.codec import check_report
from utils.errors import ParamError


def run(name, settings, params=None, seed=0):
    return ExperimentRegistry[name](settings).run(params or {}, seed)


def test_registry_names():
    assert set(ExperimentRegistry) == {
        "subcube-stats",
        "subcube-joint",
        "dvd-deadline-equiv",
        "fvs-deletion-probe",
        "approx-ratio",
    }
    assert ExperimentRegistry["approx-ratio"].description().startswith("Disjoint-path k-approximation")


def test_unnamed_experiments_cannot_register():
    class Nameless(BaseExperiment):
        def compute(self, params, seed):
            return [], {}

    with pytest.raises(ValueError):
        Nameless.register()


def test_resolve_unwraps_single_values(settings):
    experiment = ExperimentRegistry["subcube-stats"](settings)
    resolved = experiment.resolve({"k": [3], "fn": ["parity"], "mode": None})
    assert resolved["k"] == 3
    assert resolved["fn"] == ["parity"]
    assert resolved["mode"] == "exact"


def test_resolve_checks_the_value_shape(settings):
    with pytest.raises(ParamError, match="single value for k"):
        ExperimentRegistry["subcube-stats"](settings).resolve({"k": [2, 3]})
    assert ExperimentRegistry["approx-ratio"](settings).resolve({"k": 3})["k"] == [3]


def test_subcube_stats_defaults(settings):
    report = run("subcube-stats", settings)
    (row,) = report.results
    assert row["probability"] == row["dictator"] == Fraction(8, 25)
    assert not row["below_dictator"]
    assert row["top_influence"] == Fraction(1, 4)
    payload = report.to_payload()
    check_report(payload)
    assert payload["results"][0]["probability"] == "8/25"
    assert payload["results"][0]["probability_decimal"] == "0.320000"


def test_subcube_stats_majority_and_parity(settings):
    report = run("subcube-stats", settings, {"fn": ["majority", "parity", "random:4"]})
    rows = {row["function"]: row for row in report.results}
    assert rows["majority"]["below_dictator"]
    assert rows["parity"]["probability"] == 0


def test_function_specs():
    assert parse_function_spec("dictator:1", 3, 2).values == (0, 0, 0, 1, 1, 1, 1, 1, 1)
    for spec, k in (("majority", 3), ("sine", 2), ("dictator:x", 2)):
        with pytest.raises(ParamError):
            parse_function_spec(spec, k, 3)


def test_subcube_joint(settings):
    report = run("subcube-joint", settings)
    consistent, inconsistent = report.results
    assert consistent["probability"] == consistent["single_dictator"] == Fraction(3, 8)
    assert inconsistent["probability"] == Fraction(1, 8)
    assert all(row["probability"] == row["permuted_cubes"] for row in report.results)
    assert report.summary == {"consistent_matches_single": True, "inconsistent_below_single": True}
    with pytest.raises(ParamError):
        run("subcube-joint", settings, {"functions": 5})


def test_dvd_deadline_equivalence_on_small_dags(settings):
    report = run("dvd-deadline-equiv", settings, {"max_n": 3, "k": [2, 3]})
    assert [(row["k"], row["n"]) for row in report.results] == [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)]
    assert report.summary == {"dags": 22, "all_equal": True}


def test_fvs_deletion_experiment(settings):
    report = run("fvs-deletion-probe", settings, seed=2024)
    (row,) = report.results
    assert row["tests"] == 24 and row["deleted"] == 12
    assert row["cyclic"] >= 98


def test_approx_ratio_is_within_k(settings):
    report = run("approx-ratio", settings, {"count": 12, "max_n": 6})
    assert report.summary == {"all_valid": True, "all_within_bound": True}
    assert all(row["max_ratio"] <= row["k"] for row in report.results)


def test_reports_are_reproducible(settings):
    first = run("approx-ratio", settings, {"count": 8, "max_n": 5}, seed=9).to_payload()
    second = run("approx-ratio", settings, {"count": 8, "max_n": 5}, seed=9).to_payload()
    first.pop("timing")
    second.pop("timing")
    assert first == second


def test_csv_output(settings, tmp_path):
    report = run("subcube-stats", settings, {"fn": ["dictator:0", "majority"]})
    path = tmp_path / "stats.csv"
    report.write_csv(str(path))
    frame = pd.read_csv(path)
    assert list(frame["function"]) == ["dictator:0", "majority"]
    assert frame.loc[0, "probability"] == "8/25"
    assert "probability_decimal" in frame.columns
    assert "dictator=8/25" in report.summary_line()
