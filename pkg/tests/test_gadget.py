import itertools
from fractions import Fraction

import pytest

from models.digraph import (
    TEST,
    collapse_bit_vertices,
    delete_vertices,
    id_for_test,
    is_acyclic,
    longest_path_vertices,
)
from tools.gadget import (
    GadgetParams,
    PartitionWitness,
    build_fvs_gadget,
    check_coloring,
    coloring_from_deletion,
    coloring_roundtrip,
    decode_topological_split,
    dictator_partition,
    layer_colors,
    random_deletion_probe,
    unsatisfied_tests,
    verify_completeness,
)
from utils.errors import BudgetExceeded, CyclicSurvivor, InconsistentInput, InconsistentWitness, InvalidGraph, ParamError


def test_fvs_gadget_counts(fvs_gadget):
    assert len(fvs_gadget.bit_ids) == 8
    assert len(fvs_gadget.test_ids) == 24
    for t in fvs_gadget.test_ids:
        assert len(fvs_gadget.predecessors[t]) == 2
        assert len(fvs_gadget.successors[t]) == 2


def test_fvs_gadget_budget():
    with pytest.raises(BudgetExceeded):
        build_fvs_gadget(GadgetParams(k=2, R=30, s_len=3))


def test_gadget_params_guards():
    with pytest.raises(ParamError):
        GadgetParams(k=2, R=3, s_len=0)
    with pytest.raises(ParamError):
        GadgetParams(k=1, R=3, s_len=1)
    with pytest.raises(ParamError):
        GadgetParams(k=2, R=3, s_len=1, L=1)


def test_sequences_covering_every_coordinate_are_allowed():
    g = build_fvs_gadget(GadgetParams(k=2, R=2, s_len=2))
    assert len(g.test_ids) == 16
    full_cover = id_for_test((0, 0), (0, 1), 2)
    assert set(g.predecessors[full_cover]) & set(g.successors[full_cover])
    with pytest.raises(InvalidGraph):
        collapse_bit_vertices(g)
    for s in range(2):
        w = dictator_partition(g, s)
        assert len(w.prime) == 12
        assert all(verify_completeness(g, w, j).ok for j in range(2))


def test_dvd_gadget_counts(dvd_gadget):
    assert len(dvd_gadget.bit_ids) == 36
    assert len(dvd_gadget.test_ids) == 54
    assert is_acyclic(dvd_gadget)
    assert dvd_gadget.provenance["advisory"]["layers"] == 3


def test_dictator_partition_fvs(fvs_gadget):
    w = dictator_partition(fvs_gadget, 0)
    assert len(w.prime) == 8
    assert [len(c) for c in w.classes] == [8, 8]


def test_dictator_partition_dvd(dvd_gadget):
    w = dictator_partition(dvd_gadget, 1)
    assert len(w.prime) == 27
    assert [len(c) for c in w.classes] == [9, 9, 9]


@pytest.mark.parametrize("s", [0, 1, 2])
def test_fvs_completeness_leaves_no_arcs(fvs_gadget, s):
    w = dictator_partition(fvs_gadget, s)
    prime_fraction = Fraction(len(w.prime), len(fvs_gadget.test_ids))
    assert prime_fraction == 1 - Fraction(2, 3)
    for j in range(2):
        report = verify_completeness(fvs_gadget, w, j)
        assert report.ok
        assert report.detail["arcless"]


def test_dvd_completeness(dvd_gadget):
    for s in range(2):
        w = dictator_partition(dvd_gadget, s)
        for j in range(3):
            report = verify_completeness(dvd_gadget, w, j)
            assert report.ok
            assert report.detail["longest_test_path"] < 3


def test_witness_without_prime_is_inconsistent(fvs_gadget):
    w = dictator_partition(fvs_gadget, 0)
    broken = PartitionWitness(prime=frozenset(), classes=w.classes, kind=w.kind, params=w.params, s=0)
    with pytest.raises(InconsistentWitness):
        verify_completeness(fvs_gadget, broken, 0)


def test_uncovered_fvs_gadget_is_cyclic(fvs_gadget):
    assert not is_acyclic(collapse_bit_vertices(fvs_gadget))


@pytest.mark.parametrize("s", [0, 1, 2])
def test_split_decoding_recovers_the_dictator(fvs_gadget, s):
    survivors = dictator_partition(fvs_gadget, s).classes[1]
    decoded = decode_topological_split(fvs_gadget, survivors)
    assert decoded.top == (s, Fraction(1, 4))
    assert all(decoded.f_A(x) == 1 - x[s] for x in [(0, 0, 0), (1, 1, 1), (1, 0, 1)])
    assert decoded.either_fraction == 1


def test_split_decoding_of_nothing(fvs_gadget):
    decoded = decode_topological_split(fvs_gadget, [])
    assert decoded.zero_fraction == decoded.one_fraction == 1
    assert decoded.f_A.mean() == Fraction(1, 2)


def test_split_decoding_rejects_cycles(fvs_gadget):
    t = id_for_test((0, 0, 0), (1,), 2)
    partner = id_for_test((1, 1, 1), (1,), 2)
    with pytest.raises(CyclicSurvivor):
        decode_topological_split(fvs_gadget, [t, partner])


def test_random_deletions_leave_cycles(fvs_gadget):
    cyclic = random_deletion_probe(fvs_gadget, Fraction(1, 2), trials=100, seed=2024, workers=4)
    assert cyclic >= 99
    assert cyclic == random_deletion_probe(fvs_gadget, Fraction(1, 2), trials=100, seed=2024, workers=1)


def test_deleting_every_test_needs_one_color(small_dvd_gadget):
    report = coloring_roundtrip(small_dvd_gadget, deleted=small_dvd_gadget.test_ids)
    assert report.colors_used == 1
    assert report.deleted == frozenset(small_dvd_gadget.test_ids)
    assert all(fraction == 0 for fraction in report.satisfied_by_layer.values())


def test_completeness_deletion_needs_at_most_k_colors(dvd_gadget):
    w = dictator_partition(dvd_gadget, 0)
    report = coloring_roundtrip(dvd_gadget, deleted=w.prime | w.classes[2])
    assert max(report.coloring.values()) <= 3
    assert report.deleted == w.prime | w.classes[2]


def test_coloring_of_the_full_gadget_counts_the_longest_path(small_dvd_gadget):
    coloring = coloring_from_deletion(small_dvd_gadget, [])
    check_coloring(small_dvd_gadget, coloring)
    longest = longest_path_vertices(small_dvd_gadget, restrict_to_role=TEST).count
    assert max(coloring.values()) == 1 + longest
    assert longest >= 2


def test_roundtrip_never_deletes_more(dvd_gadget):
    w = dictator_partition(dvd_gadget, 1)
    for deleted in (w.prime, w.prime | w.classes[0], frozenset(dvd_gadget.test_ids[::2])):
        coloring = coloring_from_deletion(dvd_gadget, deleted)
        again = coloring_roundtrip(dvd_gadget, coloring=coloring).deleted
        assert again <= deleted


def test_decreasing_colors_are_rejected(small_dvd_gadget):
    coloring = {b: 3 - small_dvd_gadget.vertex(b).layer for b in small_dvd_gadget.bit_ids}
    with pytest.raises(InconsistentInput):
        check_coloring(small_dvd_gadget, coloring)
    with pytest.raises(ParamError):
        coloring_roundtrip(small_dvd_gadget)


def test_layer_colors_at_zero_confidence_loss(small_dvd_gadget):
    coloring = {b: 1 + small_dvd_gadget.vertex(b).layer for b in small_dvd_gadget.bit_ids}
    assert layer_colors(small_dvd_gadget, coloring, Fraction(0)) == {(None, 0): 1, (None, 1): 2, (None, 2): 3}


def test_every_coloring_matches_a_short_deletion(small_dvd_gadget):
    g = small_dvd_gadget
    bits = g.bit_ids
    assert len(bits) == 12
    deletions = set()
    for colors in itertools.product(range(1, g.k + 1), repeat=len(bits)):
        coloring = dict(zip(bits, colors))
        unsatisfied = unsatisfied_tests(g, coloring)
        survivors = delete_vertices(g, unsatisfied)
        # every surviving test is satisfied, so the survivors carry no k-test path
        assert longest_path_vertices(survivors, restrict_to_role=TEST).count < g.k
        deletions.add(unsatisfied)
    for deleted in deletions:
        coloring = coloring_from_deletion(g, deleted)
        assert max(coloring.values()) <= g.k
        assert unsatisfied_tests(g, coloring) <= deleted


def test_a_k_test_path_forces_an_unsatisfied_test(small_dvd_gadget):
    g = small_dvd_gadget
    everything = longest_path_vertices(g, restrict_to_role=TEST)
    assert everything.count >= g.k
    for colors in itertools.product(range(1, g.k + 1), repeat=len(g.bit_ids)):
        assert unsatisfied_tests(g, dict(zip(g.bit_ids, colors)))
