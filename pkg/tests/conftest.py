import math

import numpy as np
import pytest

from pairwise_coding.graphs import Edge, MixedGraph, regular, star
from pairwise_coding.model import ChannelModel, EntropyOracle, NetworkInstance


def oracle_from_points(points, c=1.0, variance=1.0) -> EntropyOracle:
    pts = np.asarray(points, dtype=float)
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    return EntropyOracle(variance * np.exp(-c * d))


def unit_channel(n, peak_power=math.inf, clamp=False) -> ChannelModel:
    return ChannelModel(tuple([1.0] * n), peak_power, clamp)


def close_triple() -> NetworkInstance:
    """Three sensors 0.1 to 0.2 apart, far enough from the sink that a tiny cap rules everything out."""
    positions = ((0.5, 0.5), (0.6, 0.5), (0.5, 0.7))
    gains = tuple(1.0 / (x * x + y * y) for x, y in positions)
    return NetworkInstance(n=3, c=1.0, positions=positions, gains=gains)


def random_digraph(rng, k, p=0.7) -> MixedGraph:
    edges = [
        Edge(regular(u), regular(v), float(rng.integers(1, 20)))
        for u in range(k) for v in range(k)
        if u != v and rng.random() < p
    ]
    return MixedGraph(regular_nodes=tuple(regular(i) for i in range(k)), directed_edges=tuple(edges))


def random_mixed_graph(rng, m, p_starred=0.6, p_directed=0.4, p_undirected=0.4) -> MixedGraph:
    starred = [i for i in range(m) if rng.random() < p_starred]
    directed = [Edge(star(i), regular(i), float(rng.integers(1, 20))) for i in starred]
    directed += [
        Edge(regular(u), regular(v), float(rng.integers(1, 20)))
        for u in range(m) for v in range(m)
        if u != v and rng.random() < p_directed
    ]
    undirected = [
        Edge(regular(u), regular(v), float(rng.integers(1, 30)), directed=False)
        for u in range(m) for v in range(u + 1, m)
        if rng.random() < p_undirected
    ]
    return MixedGraph(
        regular_nodes=tuple(regular(i) for i in range(m)),
        starred_nodes=tuple(star(i) for i in starred),
        directed_edges=tuple(directed),
        undirected_edges=tuple(undirected),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def pair_oracle():
    """Two unit-variance sources at distance 0.5 with c = 1."""
    return oracle_from_points([(0.0, 0.0), (0.5, 0.0)])


@pytest.fixture
def chain_oracle():
    """
    Four sources on a line where each source's nearest neighbour drives the
    chain 0 -> 2 -> 1 -> 3.
    """
    return oracle_from_points([(0.0, 0.5), (0.25, 0.5), (0.1, 0.5), (0.45, 0.5)])
