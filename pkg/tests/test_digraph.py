import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graph_strategies import dags, digraphs
from models.digraph import (
    TEST,
    PlainDigraph,
    TwoTypeDigraph,
    collapse_bit_vertices,
    delete_vertices,
    id_for_test,
    identify_layers,
    induced_two_type,
    is_acyclic,
    longest_path_vertices,
    make_bit_vertex,
    make_test_vertex,
    topological_sort,
)
from tools.gadget import GadgetParams, build_fvs_gadget
from utils.errors import BitDeletion, CyclicInput, InvalidGraph, UnknownVertex

CHAIN = PlainDigraph(n=3, arcs=frozenset({(0, 1), (1, 2)}))
DIAMOND = PlainDigraph(n=4, arcs=frozenset({(0, 1), (0, 2), (1, 3), (2, 3)}))


def to_networkx(g: PlainDigraph) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(g.n))
    graph.add_edges_from(g.arcs)
    return graph


def test_topological_sort_chain():
    assert topological_sort(CHAIN).order == (0, 1, 2)


def test_topological_sort_two_cycle():
    result = topological_sort(PlainDigraph(n=2, arcs=frozenset({(0, 1), (1, 0)})))
    assert not result.acyclic
    assert result.cycle == (0, 1)


def test_topological_sort_breaks_ties_by_smallest_id():
    assert topological_sort(PlainDigraph(n=3, arcs=frozenset())).order == (0, 1, 2)


def test_longest_path_examples():
    assert longest_path_vertices(CHAIN).count == 3
    assert longest_path_vertices(PlainDigraph(n=4, arcs=frozenset())).count == 1
    diamond = longest_path_vertices(DIAMOND)
    assert diamond.count == 3
    assert diamond.witness == (0, 1, 3)


def test_longest_path_rejects_cycles():
    with pytest.raises(CyclicInput):
        longest_path_vertices(PlainDigraph(n=2, arcs=frozenset({(0, 1), (1, 0)})))


def test_delete_vertices_plain():
    remainder = delete_vertices(CHAIN, {1})
    assert remainder.n == 2
    assert remainder.arcs == frozenset()
    assert remainder.labels == (0, 2)
    assert delete_vertices(CHAIN, set()) == CHAIN


def test_delete_vertices_refuses_bits(fvs_gadget):
    with pytest.raises(BitDeletion):
        delete_vertices(fvs_gadget, {fvs_gadget.bit_ids[0]})
    with pytest.raises(UnknownVertex):
        delete_vertices(fvs_gadget, {"t:nope"})


def test_collapse_fvs_gadget_size(fvs_gadget):
    collapsed = collapse_bit_vertices(fvs_gadget)
    assert collapsed.n == 24
    assert collapsed.labels == fvs_gadget.test_ids


def test_collapse_fvs_gadget_two_cycles(fvs_gadget):
    collapsed = collapse_bit_vertices(fvs_gadget)
    for t in fvs_gadget.test_ids:
        x, seq = fvs_gadget.vertex(t).payload[:2]
        partner = id_for_test(tuple(1 - d for d in x), seq, 2)
        a, b = collapsed.index_of(t), collapsed.index_of(partner)
        assert (a, b) in collapsed.arcs and (b, a) in collapsed.arcs


def test_collapse_matches_two_arc_paths(fvs_gadget):
    collapsed = collapse_bit_vertices(fvs_gadget)
    expected = set()
    for t in fvs_gadget.test_ids:
        for b in fvs_gadget.successors[t]:
            for head in fvs_gadget.successors[b]:
                expected.add((collapsed.index_of(t), collapsed.index_of(head)))
    assert collapsed.arcs == frozenset(expected)


def test_collapse_without_two_arc_paths():
    bit = make_bit_vertex((0, 0), 2)
    test = make_test_vertex((0, 0), (0,), 2)
    g = TwoTypeDigraph(vertices=(bit, test), arcs=frozenset({(bit.id, test.id)}), k=2, kind="fvs-gadget")
    assert collapse_bit_vertices(g).arcs == frozenset()


def test_gadget_kinds_reject_bit_to_bit_arcs():
    a, b = make_bit_vertex((0, 0), 2), make_bit_vertex((1, 0), 2)
    with pytest.raises(InvalidGraph):
        TwoTypeDigraph(vertices=(a, b), arcs=frozenset({(a.id, b.id)}), k=2, kind="fvs-gadget")


def test_layered_kinds_reject_backward_arcs():
    test = make_test_vertex((0, 0), (0,), 2, layer=1)
    bit = make_bit_vertex((1, 0), 2, layer=1)
    with pytest.raises(InvalidGraph):
        TwoTypeDigraph(vertices=(bit, test), arcs=frozenset({(test.id, bit.id)}), k=2, kind="dvd-gadget")


def test_plain_digraph_invariants():
    with pytest.raises(InvalidGraph):
        PlainDigraph(n=2, arcs=frozenset({(1, 1)}))
    with pytest.raises(InvalidGraph):
        PlainDigraph(n=2, arcs=frozenset({(0, 2)}))


def test_role_restricted_path_matches_collapsed_path(dvd_gadget):
    collapsed = longest_path_vertices(collapse_bit_vertices(dvd_gadget)).count
    assert collapsed >= 3
    assert longest_path_vertices(dvd_gadget, restrict_to_role=TEST).count == collapsed


def test_identify_layers_gives_the_flat_gadget(small_dvd_gadget):
    flat = identify_layers(small_dvd_gadget)
    assert flat == build_fvs_gadget(GadgetParams(k=2, R=2, s_len=1))


def test_induced_two_type_keeps_every_bit(fvs_gadget):
    survivors = fvs_gadget.test_ids[:5]
    induced = induced_two_type(fvs_gadget, survivors)
    assert induced.bit_ids == fvs_gadget.bit_ids
    assert induced.test_ids == survivors


@given(digraphs())
def test_acyclicity_agrees_with_networkx(g):
    assert is_acyclic(g) == nx.is_directed_acyclic_graph(to_networkx(g))


@given(digraphs())
def test_sort_result_is_an_order_or_a_cycle(g):
    result = topological_sort(g)
    if result.acyclic:
        position = {v: i for i, v in enumerate(result.order)}
        assert sorted(result.order) == list(range(g.n))
        assert all(position[a] < position[b] for a, b in g.arcs)
    else:
        cycle = result.cycle
        closing = list(zip(cycle, cycle[1:] + cycle[:1]))
        assert all(arc in g.arcs for arc in closing)


@given(dags())
def test_longest_path_agrees_with_networkx(g):
    result = longest_path_vertices(g)
    assert result.count == nx.dag_longest_path_length(to_networkx(g)) + 1
    assert len(result.witness) == result.count
    assert all(arc in g.arcs for arc in zip(result.witness, result.witness[1:]))



@given(dags())
def test_longest_path_prefers_the_smallest_ids(g):
    ending = {}
    for v in range(g.n):
        ending[v] = 1 + max((ending[u] for u in g.predecessors[v]), default=0)
    witness = longest_path_vertices(g).witness
    best = max(ending.values())
    assert witness[-1] == min(v for v in ending if ending[v] == best)
    for before, after in zip(witness, witness[1:]):
        assert before == min(u for u in g.predecessors[after] if ending[u] == ending[after] - 1)


@settings(max_examples=50)
@given(digraphs(), st.data())
def test_deletions_compose(g, data):
    chosen = data.draw(st.sets(st.integers(0, g.n - 1)))
    first = data.draw(st.sets(st.sampled_from(sorted(chosen)))) if chosen else set()
    second = chosen - first
    once = delete_vertices(g, chosen)
    partial = delete_vertices(g, first)
    twice = delete_vertices(partial, [partial.index_of(v) for v in second])
    assert once == twice
