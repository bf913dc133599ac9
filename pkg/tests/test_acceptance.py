"""End-to-end checks of every construction at desk scale, with exact rationals."""

import itertools
from fractions import Fraction

import pytest

from experiments import ExperimentRegistry
from formats.codec import dumps, encode_graph, encode_ug
from models.boolfn import (
    degree_influence,
    dictator_zero_probability,
    influence,
    make_dictator,
    make_majority,
    random_boolean_functions,
    subcube_zero_probability,
)
from models.digraph import collapse_bit_vertices, delete_vertices, id_for_test
from models.timecost import (
    brute_force_deadline,
    dvd_to_deadline,
    enumerate_dags,
    is_feasible,
    realization_from_deletion,
)
from models.unique_games import generate, instance_hash
from tools.gadget import (
    GadgetParams,
    build_fvs_gadget,
    decode_topological_split,
    dictator_partition,
    verify_completeness,
)
from tools.reduction import (
    ReductionParams,
    decode_labeling,
    dictator_survivors,
    partition_from_labeling,
    ug_to_dvd,
    ug_to_fvs,
)
from tools.solvers import brute_force_dvd, has_k_path

SEEDS = range(20)


def satisfiable_instance(seed):
    return generate("satisfiable", 2, 2, 2, 2, seed=seed)


@pytest.mark.parametrize("s", [0, 1, 2])
def test_fvs_gadget_completeness(fvs_gadget, s):
    w = dictator_partition(fvs_gadget, s)
    assert len(w.prime) == 8
    assert [len(c) for c in w.classes] == [8, 8]
    for j in (0, 1):
        report = verify_completeness(fvs_gadget, w, j)
        assert report.detail["arcless"] and report.ok


def test_fvs_gadget_two_cycles(fvs_gadget):
    collapsed = collapse_bit_vertices(fvs_gadget)
    pairs = 0
    for x in itertools.product(range(2), repeat=3):
        for seq in itertools.product(range(3), repeat=1):
            a = collapsed.index_of(id_for_test(x, seq, 2))
            b = collapsed.index_of(id_for_test(tuple(1 - d for d in x), seq, 2))
            assert (a, b) in collapsed.arcs and (b, a) in collapsed.arcs
            pairs += 1
    assert pairs == 24


def test_dvd_gadget_completeness(dvd_gadget):
    for s in range(2):
        w = dictator_partition(dvd_gadget, s)
        for j in range(3):
            assert verify_completeness(dvd_gadget, w, j).detail["longest_test_path"] < 3


@pytest.mark.slow
@pytest.mark.parametrize("k,R", [(2, 4), (3, 3)])
def test_degree_influences_on_random_functions(k, R):
    for f in random_boolean_functions(k, R, count=100, seed=0):
        for d in range(1, R + 1):
            assert sum(degree_influence(f, i, d) for i in range(R)) <= d
        assert all(degree_influence(f, i, R) == influence(f, i) for i in range(R))


def test_dictator_subcube_statistic():
    dictator = subcube_zero_probability(make_dictator(2, 5, 0), 2)
    assert dictator == dictator_zero_probability(2, 5, 2) == Fraction(8, 25)
    assert subcube_zero_probability(make_majority(5), 2) < dictator


@pytest.mark.parametrize("s", [0, 1, 2])
def test_split_decoder_recovers_the_dictator(fvs_gadget, s):
    survivors = dictator_partition(fvs_gadget, s).classes[1]
    assert decode_topological_split(fvs_gadget, survivors).top == (s, Fraction(1, 4))


@pytest.mark.parametrize("seed", SEEDS)
def test_reduction_completeness(seed):
    instance = satisfiable_instance(seed)
    fvs = ug_to_fvs(instance, ReductionParams(k=2, s_len=1, t=1))
    assert all(r.detail["acyclic"] for r in partition_from_labeling(fvs, instance.planted).reports)
    dvd = ug_to_dvd(instance, ReductionParams(k=2, s_len=1, t=1, L=2))
    assert all(r.detail["longest_test_path"] < 2 for r in partition_from_labeling(dvd, instance.planted).reports)


@pytest.mark.parametrize("seed", SEEDS)
def test_reduction_decoder(seed):
    instance = satisfiable_instance(seed)
    g = ug_to_fvs(instance, ReductionParams(k=2, s_len=1, t=1))
    decoded = decode_labeling(g, dictator_survivors(g, instance.planted))
    assert decoded.val == 1
    assert decoded.diagnostics["candidate_bound_holds"]


@pytest.mark.slow
@pytest.mark.parametrize("k", [2, 3])
def test_dvd_deadline_equivalence_on_five_vertices(k):
    checked = 0
    for g in enumerate_dags(5):
        cost, _ = brute_force_deadline(dvd_to_deadline(g, k))
        assert cost == len(brute_force_dvd(g, k)), sorted(g.arcs)
        checked += 1
    assert checked == 1024


def test_feasibility_matches_path_freeness():
    for g in enumerate_dags(4):
        inst = dvd_to_deadline(g, 2)
        for size in range(5):
            for deleted in itertools.combinations(range(4), size):
                feasible = is_feasible(inst, realization_from_deletion(inst, g, deleted))
                assert feasible == (not has_k_path(delete_vertices(g, deleted), 2))


@pytest.mark.slow
def test_k_approximation_on_random_dags(settings):
    report = ExperimentRegistry["approx-ratio"](settings).run({"count": 500, "max_n": 14, "k": [2, 3, 4]}, seed=0)
    assert report.summary == {"all_valid": True, "all_within_bound": True}
    assert [row["instances"] for row in report.results] == [500, 500, 500]


def test_generators_are_byte_identical():
    a, b = satisfiable_instance(5), satisfiable_instance(5)
    assert dumps(encode_ug(a)) == dumps(encode_ug(b))
    assert instance_hash(a) == instance_hash(b)
    p = ReductionParams(k=2, s_len=1, t=1)
    assert dumps(encode_graph(ug_to_fvs(a, p))) == dumps(encode_graph(ug_to_fvs(b, p)))
    gadget = GadgetParams(k=2, R=3, s_len=1)
    assert dumps(encode_graph(build_fvs_gadget(gadget))) == dumps(encode_graph(build_fvs_gadget(gadget)))


@pytest.mark.parametrize(
    "name,params",
    [
        ("subcube-stats", {"fn": ["majority"], "mode": "sampled", "trials": 200}),
        ("subcube-joint", {}),
        ("dvd-deadline-equiv", {"max_n": 3}),
        ("fvs-deletion-probe", {"trials": 20}),
        ("approx-ratio", {"count": 10, "max_n": 6}),
    ],
)
def test_experiments_are_byte_identical(settings, name, params):
    runs = []
    for _ in range(2):
        payload = ExperimentRegistry[name](settings).run(params, seed=42).to_payload()
        payload.pop("timing")
        runs.append(dumps(payload))
    assert runs[0] == runs[1]
