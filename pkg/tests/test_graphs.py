import math

import numpy as np
import pytest

from pairwise_coding.allocation import per_pair_power_optimum
from pairwise_coding.exceptions import InvalidArgumentError
from pairwise_coding.graphs import (
    Edge,
    EdgeKind,
    MixedGraph,
    SubgraphSelection,
    build_matching_graph,
    build_mixed_test_graph,
    build_mixed_total_graph,
    build_test_graph,
    build_total_digraph,
    head_count,
    is_uug_acyclic,
    parent_set,
    regular,
    rooted_variant,
    star,
    transformed_edge,
    underlying_undirected,
    weight_transform,
)
from pairwise_coding.model import ChannelModel, EntropyOracle, generate_network
from pairwise_coding.solvers import brute_force_enumerate
from tests.conftest import random_mixed_graph, unit_channel


def _three_nodes(directed=(), undirected=()):
    return MixedGraph(
        regular_nodes=(regular(0), regular(1), regular(2)),
        directed_edges=tuple(Edge(regular(a), regular(b), 1.0) for a, b in directed),
        undirected_edges=tuple(Edge(regular(a), regular(b), 1.0, directed=False) for a, b in undirected),
    )


# ============================================================================
# Representation
# ============================================================================

def test_node_labels():
    assert str(regular(3)) == '3'
    assert str(star(3)) == '3*'


def test_undirected_edges_are_normalized():
    e = Edge(regular(4), regular(1), 2.0, directed=False)
    assert (e.tail, e.head) == (regular(1), regular(4))
    assert e.kind is EdgeKind.UNDIRECTED
    assert Edge(star(1), regular(1), 1.0).kind is EdgeKind.STARRED


@pytest.mark.parametrize('kwargs', [
    {'directed_edges': (Edge(regular(0), star(0), 1.0),)},
    {'directed_edges': (Edge(regular(0), regular(1), 1.0), Edge(regular(0), regular(1), 2.0))},
    {'undirected_edges': (Edge(regular(0), regular(1), 1.0, False), Edge(regular(1), regular(0), 2.0, False))},
    {'undirected_edges': (Edge(star(0), regular(1), 1.0, False),)},
    {'directed_edges': (Edge(regular(0), regular(5), 1.0),)},
])
def test_graph_invariants(kwargs):
    with pytest.raises(InvalidArgumentError):
        MixedGraph(regular_nodes=(regular(0), regular(1)), starred_nodes=(star(0),), **kwargs)


def test_selection_must_come_from_parent():
    g = _three_nodes(directed=[(0, 1)])
    with pytest.raises(InvalidArgumentError):
        SubgraphSelection(g, (Edge(regular(1), regular(2), 1.0),))


def test_graph_to_dict():
    g = _three_nodes(directed=[(0, 1)], undirected=[(1, 2)])
    data = g.to_dict()
    assert data == {
        'tails': ['0', '1'],
        'heads': ['1', '2'],
        'weights': [1.0, 1.0],
        'kind': ['directed', 'undirected'],
    }


# ============================================================================
# Heads and the underlying undirected graph
# ============================================================================

def test_head_count():
    g = _three_nodes(directed=[(0, 1)], undirected=[(1, 2)])
    assert head_count(g, regular(0)) == 0
    assert head_count(g, regular(2)) == 1
    assert head_count(g, regular(1)) == 2
    selection = SubgraphSelection(g, (g.directed_edges[0],))
    assert head_count(selection, regular(1)) == 1
    with pytest.raises(InvalidArgumentError):
        head_count(g, regular(7))


def test_underlying_undirected():
    assert underlying_undirected(MixedGraph(regular_nodes=())).number_of_edges() == 0
    assert is_uug_acyclic(MixedGraph(regular_nodes=()))

    single = _three_nodes(directed=[(0, 1)])
    assert underlying_undirected(single).number_of_edges() == 1
    assert is_uug_acyclic(single)


def test_parallel_directed_and_undirected_edges_form_a_cycle():
    g = _three_nodes(directed=[(0, 1)], undirected=[(0, 1)])
    assert underlying_undirected(g).number_of_edges() == 2
    assert not is_uug_acyclic(g)


def test_opposite_directed_edges_form_a_cycle():
    assert not is_uug_acyclic(_three_nodes(directed=[(0, 1), (1, 0)]))


# ============================================================================
# Noiseless graphs
# ============================================================================

def test_total_digraph_two_sources(pair_oracle):
    g = build_total_digraph(pair_oracle)
    assert len(g.nodes) == 4
    assert len(g.directed_edges) == 4
    weights = sorted(e.weight for e in g.directed_edges)
    h = pair_oracle.conditional_entropy(0, 1)
    assert weights == pytest.approx(sorted([pair_oracle.h1, pair_oracle.h1, h, h]))

    rooted = rooted_variant(g, 0)
    assert {(e.tail, e.head) for e in rooted.edges} == {
        (star(0), regular(0)), (regular(0), regular(1)), (regular(1), regular(0)),
    }
    with pytest.raises(InvalidArgumentError):
        rooted_variant(rooted, 1)


def test_total_digraph_weights_are_conditionals():
    oracle = EntropyOracle.from_instance(generate_network(3, 1.0, 4))
    g = build_total_digraph(oracle)
    for e in g.directed_edges:
        if e.tail.starred:
            assert e.weight == pytest.approx(oracle.marginal_entropy(e.head.index))
        else:
            assert e.weight == pytest.approx(oracle.conditional_entropy(e.head.index, e.tail.index))


def test_total_digraph_needs_two_sources():
    with pytest.raises(InvalidArgumentError):
        build_total_digraph(EntropyOracle([[1.0]]))


def test_test_graph_at_marginals_is_complete(chain_oracle):
    g = build_test_graph(list(chain_oracle.marginals), chain_oracle)
    assert len(parent_set(g)) == 4
    assert len(g.directed_edges) == 4 + 4 * 3


def test_test_graph_at_zero_is_empty(chain_oracle):
    g = build_test_graph([0.0] * 4, chain_oracle)
    assert g.nodes == ()
    assert parent_set(g) == ()


def test_test_graph_of_a_chain(chain_oracle):
    H = chain_oracle.conditionals
    rates = [chain_oracle.h1, H[1, 2], H[2, 0], H[3, 1]]
    g = build_test_graph(rates, chain_oracle)
    pairs = {(e.tail, e.head) for e in g.directed_edges}
    assert {(star(0), regular(0)), (regular(0), regular(2)), (regular(2), regular(1)), (regular(1), regular(3))} <= pairs
    assert parent_set(g) == (star(0),)


def test_test_graph_rejects_wrong_length(chain_oracle):
    with pytest.raises(InvalidArgumentError):
        build_test_graph([1.0, 1.0], chain_oracle)


def test_test_graph_is_a_subgraph_of_the_total_graph(rng):
    oracle = EntropyOracle.from_instance(generate_network(5, 1.0, 8))
    total = build_total_digraph(oracle)
    for _ in range(20):
        rates = rng.uniform(0.5, oracle.h1 + 0.2, size=5)
        g = build_test_graph(rates, oracle)
        assert set(g.edges) <= total.edge_set


def test_matching_graph_skips_missing_pairs():
    g = build_matching_graph(4, lambda i, j: None if (i, j) == (0, 1) else float(i + j))
    assert len(g.undirected_edges) == 5
    assert g.undirected_edge(regular(0), regular(1)) is None
    assert g.undirected_edge(regular(3), regular(2)).weight == 5.0


# ============================================================================
# Noisy graphs
# ============================================================================

def test_mixed_total_graph_without_a_cap():
    oracle = EntropyOracle.from_instance(generate_network(4, 1.0, 2))
    g = build_mixed_total_graph(oracle, unit_channel(4), per_pair_power_optimum)
    assert len(g.directed_edges) == 4 + 4 * 3
    assert len(g.undirected_edges) == 6
    for e in g.undirected_edges:
        opt = per_pair_power_optimum(oracle, unit_channel(4), e.tail.index, e.head.index)
        assert e.weight == pytest.approx(opt.total_power)


def test_mixed_total_graph_prunes_by_peak_power(chain_oracle):
    channel = unit_channel(4, peak_power=0.5)
    g = build_mixed_total_graph(chain_oracle, channel, per_pair_power_optimum)
    assert not [e for e in g.directed_edges if not e.tail.starred]
    assert not g.edges


def test_mixed_total_graph_undirected_weight_matches_grid_search():
    inst = generate_network(4, 1.0, 6)
    oracle = EntropyOracle.from_instance(inst)
    channel = ChannelModel.from_instance(inst, peak_power=10.0)
    g = build_mixed_total_graph(oracle, channel, per_pair_power_optimum)
    for e in g.undirected_edges:
        i, j = e.tail.index, e.head.index
        ent = oracle.pairwise_entropies(i, j)
        r_i = np.arange(ent.H_i_given_j, ent.H_ij - ent.H_j_given_i + 1e-12, 1e-4)
        p_i = np.expm1(r_i * math.log(2)) / channel.gains[i]
        p_j = np.expm1((ent.H_ij - r_i) * math.log(2)) / channel.gains[j]
        ok = (p_i <= 10.0) & (p_j <= 10.0)
        if ok.any():
            best = (p_i + p_j)[ok].min()
            assert e.weight <= best + 1e-9
            assert best - e.weight < 1e-3


def test_mixed_test_graph_at_a_corner(pair_oracle):
    ent = pair_oracle.pairwise_entropies(0, 1)
    g = build_mixed_test_graph([ent.H_i, ent.H_j_given_i], pair_oracle, unit_channel(2), per_pair_power_optimum)
    assert g.undirected_edge(regular(0), regular(1)) is not None
    assert g.directed_edge(star(0), regular(0)) is not None
    assert g.directed_edge(regular(0), regular(1)) is not None
    assert g.directed_edge(star(1), regular(1)) is None


def test_mixed_test_graph_empty_below_every_threshold(chain_oracle):
    g = build_mixed_test_graph([0.1] * 4, chain_oracle, unit_channel(4), per_pair_power_optimum)
    assert g.nodes == ()


def test_mixed_test_graph_at_marginals_has_every_family(chain_oracle):
    g = build_mixed_test_graph(list(chain_oracle.marginals), chain_oracle, unit_channel(4), per_pair_power_optimum)
    assert len(g.undirected_edges) == 6
    assert len(g.directed_edges) == 16
    assert g.directed_edge(star(2), regular(2)).weight == pytest.approx(math.expm1(chain_oracle.h1 * math.log(2)))


# ============================================================================
# Weight transform
# ============================================================================

def test_weight_transform_of_empty_graph():
    g, lam = weight_transform(MixedGraph(regular_nodes=(regular(0),)))
    assert lam == 1.0
    assert g.edges == ()


def test_weight_transform_of_one_edge():
    g = MixedGraph(regular_nodes=(regular(0), regular(1)), directed_edges=(Edge(regular(0), regular(1), 2.5),))
    h, lam = weight_transform(g)
    assert lam == 3.5
    assert h.directed_edges[0].weight == pytest.approx(1.0)
    assert transformed_edge(g.directed_edges[0], h).weight == pytest.approx(1.0)


def test_weight_transform_strict_forest_identity(rng):
    for _ in range(10):
        g = random_mixed_graph(rng, 4)
        h, lam = weight_transform(g)
        for forest in brute_force_enumerate(g, 'smf'):
            moved = [transformed_edge(e, h) for e in forest.edges]
            assert math.fsum(e.weight for e in moved) == pytest.approx(4 * lam - forest.weight)
