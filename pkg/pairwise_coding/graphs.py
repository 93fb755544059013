"""
Directed and mixed graphs used by the allocator.

Regular node i stands for source X_i; starred node i* is a virtual source
whose only edge (i* -> i) carries the cost of sending X_i at full marginal
rate. A pure digraph is a MixedGraph without undirected edges.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import networkx as nx

from .config import THRESHOLD_SLACK
from .exceptions import InvalidArgumentError
from .model import ChannelModel, EntropyOracle

if TYPE_CHECKING:
    from .allocation import PairOptimum

logger = logging.getLogger(__name__)

PairOptimizer = Callable[[EntropyOracle, ChannelModel, int, int], 'PairOptimum']


class Node(NamedTuple):
    index: int
    starred: bool = False

    def __str__(self):
        return f"{self.index}*" if self.starred else str(self.index)


def regular(i: int) -> Node:
    return Node(i, False)


def star(i: int) -> Node:
    return Node(i, True)


class EdgeKind(str, Enum):
    STARRED = 'starred'
    DIRECTED = 'directed'
    UNDIRECTED = 'undirected'


@dataclass(frozen=True)
class Edge:
    tail: Node
    head: Node
    weight: float
    directed: bool = True

    def __post_init__(self):
        if not self.directed and self.head < self.tail:
            tail, head = self.head, self.tail
            object.__setattr__(self, 'tail', tail)
            object.__setattr__(self, 'head', head)

    @property
    def kind(self) -> EdgeKind:
        if not self.directed:
            return EdgeKind.UNDIRECTED
        return EdgeKind.STARRED if self.tail.starred else EdgeKind.DIRECTED

    @property
    def heads(self) -> Tuple[Node, ...]:
        return (self.head,) if self.directed else (self.tail, self.head)

    @property
    def endpoints(self) -> Tuple[Node, Node]:
        return self.tail, self.head

    @property
    def sort_key(self):
        # Ties broken by tail then head index.
        return self.weight, self.tail, self.head, self.directed

    def reweighted(self, weight: float) -> 'Edge':
        return Edge(self.tail, self.head, weight, self.directed)

    def to_dict(self) -> dict:
        return {
            'tail': str(self.tail),
            'head': str(self.head),
            'weight': self.weight,
            'kind': self.kind.value,
        }


@dataclass(frozen=True)
class MixedGraph:
    regular_nodes: Tuple[Node, ...]
    starred_nodes: Tuple[Node, ...] = ()
    directed_edges: Tuple[Edge, ...] = ()
    undirected_edges: Tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'regular_nodes', tuple(sorted(set(self.regular_nodes))))
        object.__setattr__(self, 'starred_nodes', tuple(sorted(set(self.starred_nodes))))
        object.__setattr__(self, 'directed_edges', tuple(sorted(self.directed_edges, key=lambda e: (e.tail, e.head))))
        object.__setattr__(self, 'undirected_edges', tuple(sorted(self.undirected_edges, key=lambda e: (e.tail, e.head))))
        if any(v.starred for v in self.regular_nodes) or any(not v.starred for v in self.starred_nodes):
            raise InvalidArgumentError("regular and starred node sets are mixed up")

        nodes = set(self.nodes)
        seen = set()
        for e in self.directed_edges:
            if not e.directed:
                raise InvalidArgumentError(f"undirected edge {e} listed as directed")
            if e.head.starred:
                raise InvalidArgumentError(f"starred node {e.head} cannot be a head")
            if e.tail == e.head:
                raise InvalidArgumentError(f"self loop at {e.tail}")
            if e.tail not in nodes or e.head not in nodes:
                raise InvalidArgumentError(f"edge {e.tail}->{e.head} uses a node outside the graph")
            if (e.tail, e.head) in seen:
                raise InvalidArgumentError(f"duplicate directed edge {e.tail}->{e.head}")
            seen.add((e.tail, e.head))
        seen = set()
        for e in self.undirected_edges:
            if e.directed:
                raise InvalidArgumentError(f"directed edge {e} listed as undirected")
            if e.tail.starred or e.head.starred:
                raise InvalidArgumentError("starred nodes cannot join undirected edges")
            if e.tail == e.head:
                raise InvalidArgumentError(f"self loop at {e.tail}")
            if e.tail not in nodes or e.head not in nodes:
                raise InvalidArgumentError(f"edge ({e.tail},{e.head}) uses a node outside the graph")
            if (e.tail, e.head) in seen:
                raise InvalidArgumentError(f"duplicate undirected edge ({e.tail},{e.head})")
            seen.add((e.tail, e.head))

    @property
    def nodes(self) -> Tuple[Node, ...]:
        return self.regular_nodes + self.starred_nodes

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return self.directed_edges + self.undirected_edges

    @property
    def is_digraph(self) -> bool:
        return not self.undirected_edges

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    @cached_property
    def in_edges(self) -> Dict[Node, Tuple[Edge, ...]]:
        table: Dict[Node, List[Edge]] = {v: [] for v in self.nodes}
        for e in self.directed_edges:
            table[e.head].append(e)
        return {v: tuple(es) for v, es in table.items()}

    @cached_property
    def incident_undirected(self) -> Dict[Node, Tuple[Edge, ...]]:
        table: Dict[Node, List[Edge]] = {v: [] for v in self.nodes}
        for e in self.undirected_edges:
            table[e.tail].append(e)
            table[e.head].append(e)
        return {v: tuple(es) for v, es in table.items()}

    def directed_edge(self, tail: Node, head: Node) -> Optional[Edge]:
        for e in self.in_edges.get(head, ()):
            if e.tail == tail:
                return e
        return None

    def undirected_edge(self, u: Node, v: Node) -> Optional[Edge]:
        for e in self.incident_undirected.get(u, ()):
            if v in e.endpoints:
                return e
        return None

    def has_node(self, v: Node) -> bool:
        return v in self.in_edges

    def to_networkx(self) -> nx.DiGraph:
        """Directed part as a networkx DiGraph, nodes inserted in sorted order."""
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for e in self.directed_edges:
            g.add_edge(e.tail, e.head, weight=e.weight)
        return g

    def with_edges(self, edges: Iterable[Edge], keep_isolated: bool = True) -> 'MixedGraph':
        edges = list(edges)
        if keep_isolated:
            regular_nodes, starred_nodes = self.regular_nodes, self.starred_nodes
        else:
            used = {v for e in edges for v in e.endpoints}
            regular_nodes = tuple(v for v in self.regular_nodes if v in used)
            starred_nodes = tuple(v for v in self.starred_nodes if v in used)
        return MixedGraph(
            regular_nodes=regular_nodes,
            starred_nodes=starred_nodes,
            directed_edges=tuple(e for e in edges if e.directed),
            undirected_edges=tuple(e for e in edges if not e.directed),
        )

    def without_isolated_nodes(self) -> 'MixedGraph':
        return self.with_edges(self.edges, keep_isolated=False)

    def to_dict(self) -> dict:
        edges = self.edges
        return {
            'tails': [str(e.tail) for e in edges],
            'heads': [str(e.head) for e in edges],
            'weights': [e.weight for e in edges],
            'kind': [e.kind.value for e in edges],
        }


@dataclass(frozen=True)
class SubgraphSelection:
    """A chosen subset of a parent graph's edges (arborescence, matching or forest)."""
    parent: MixedGraph = field(repr=False)
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, 'edges', tuple(sorted(self.edges, key=lambda e: (e.head, e.tail, e.directed))))
        missing = [e for e in self.edges if e not in self.parent.edge_set]
        if missing:
            raise InvalidArgumentError(f"{len(missing)} selected edge(s) are not in the parent graph")

    @property
    def weight(self) -> float:
        return math.fsum(e.weight for e in self.edges)

    def as_graph(self) -> MixedGraph:
        return self.parent.with_edges(self.edges)

    def to_dict(self) -> dict:
        return {'edges': [e.to_dict() for e in self.edges], 'weight': self.weight}


GraphLike = Union[MixedGraph, SubgraphSelection]


# ============================================================================
# Structural queries
# ============================================================================

def head_count(graph: GraphLike, node: Node) -> int:
    """Number of edges of which `node` is a head (directed in-edges plus undirected edges)."""
    parent = graph.parent if isinstance(graph, SubgraphSelection) else graph
    if not parent.has_node(node):
        raise InvalidArgumentError(f"unknown node {node}")
    edges = graph.edges
    return sum(1 for e in edges if node in e.heads)


def underlying_undirected(graph: GraphLike) -> nx.MultiGraph:
    """Orientation-erased multigraph; a directed edge parallel to an undirected one stays a separate edge."""
    parent = graph.parent if isinstance(graph, SubgraphSelection) else graph
    uug = nx.MultiGraph()
    uug.add_nodes_from(parent.nodes)
    for e in graph.edges:
        uug.add_edge(e.tail, e.head, kind=e.kind.value, weight=e.weight)
    return uug


def is_uug_acyclic(graph: GraphLike) -> bool:
    uug = underlying_undirected(graph)
    if uug.number_of_nodes() == 0:
        return True
    return nx.is_forest(uug)


# ============================================================================
# Noiseless graphs
# ============================================================================

def build_total_digraph(oracle: EntropyOracle) -> MixedGraph:
    """G^tot: edges (i* -> i) weighted H(X_i) and (i -> j) weighted H(X_j | X_i)."""
    n = oracle.n
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 sources, got {n}")
    H = oracle.conditionals
    edges = [Edge(star(i), regular(i), float(oracle.marginals[i])) for i in range(n)]
    edges += [
        Edge(regular(i), regular(j), float(H[j, i]))
        for i in range(n) for j in range(n) if i != j
    ]
    return MixedGraph(
        regular_nodes=tuple(regular(i) for i in range(n)),
        starred_nodes=tuple(star(i) for i in range(n)),
        directed_edges=tuple(edges),
    )


def rooted_variant(graph: MixedGraph, i: int) -> MixedGraph:
    """G_{i*}: drop every starred node except i* together with its edges."""
    keep = star(i)
    if keep not in graph.starred_nodes:
        raise InvalidArgumentError(f"graph has no starred node {keep}")
    return MixedGraph(
        regular_nodes=graph.regular_nodes,
        starred_nodes=(keep,),
        directed_edges=tuple(e for e in graph.directed_edges if not e.tail.starred or e.tail == keep),
        undirected_edges=graph.undirected_edges,
    )


def _check_rates(rates: Sequence[float], oracle: EntropyOracle):
    if len(rates) != oracle.n:
        raise InvalidArgumentError(f"rate vector has {len(rates)} entries, expected {oracle.n}")


def build_test_graph(rates: Sequence[float], oracle: EntropyOracle) -> MixedGraph:
    """Pairwise property test graph G(R), isolated nodes removed."""
    _check_rates(rates, oracle)
    n = oracle.n
    H = oracle.conditionals
    edges = []
    for i in range(n):
        if rates[i] >= oracle.marginals[i] - THRESHOLD_SLACK:
            edges.append(Edge(star(i), regular(i), float(oracle.marginals[i])))
        for j in range(n):
            if j != i and rates[i] >= H[i, j] - THRESHOLD_SLACK:
                edges.append(Edge(regular(j), regular(i), float(H[i, j])))
    full = MixedGraph(
        regular_nodes=tuple(regular(i) for i in range(n)),
        starred_nodes=tuple(star(i) for i in range(n)),
        directed_edges=tuple(edges),
    )
    return full.without_isolated_nodes()


def parent_set(graph: MixedGraph) -> Tuple[Node, ...]:
    """Starred nodes that still carry their (i* -> i) edge."""
    return tuple(v for v in graph.starred_nodes if any(e.tail == v for e in graph.directed_edges))


def build_matching_graph(n: int, weight: Callable[[int, int], Optional[float]]) -> MixedGraph:
    """Complete undirected graph on n regular nodes; pairs weighted None are left out."""
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            w = weight(i, j)
            if w is not None:
                edges.append(Edge(regular(i), regular(j), float(w), directed=False))
    return MixedGraph(regular_nodes=tuple(regular(i) for i in range(n)), undirected_edges=tuple(edges))


# ============================================================================
# Noisy graphs
# ============================================================================

def _pair_optima(oracle: EntropyOracle, channel: ChannelModel, pair_optimizer: PairOptimizer) -> Dict[Tuple[int, int], 'PairOptimum']:
    return {
        (i, j): pair_optimizer(oracle, channel, i, j)
        for i in range(oracle.n) for j in range(i + 1, oracle.n)
    }


def build_mixed_total_graph(oracle: EntropyOracle, channel: ChannelModel,
                            pair_optimizer: PairOptimizer) -> MixedGraph:
    """Mixed G^tot: power-weighted starred, directed and undirected edges under the peak cap."""
    n = oracle.n
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 sources, got {n}")
    H = oracle.conditionals
    directed = []
    for i in range(n):
        w = channel.transmit_power(i, float(oracle.marginals[i]))
        if channel.within_peak(w):
            directed.append(Edge(star(i), regular(i), w))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            w = channel.transmit_power(j, float(H[j, i]))
            if channel.within_peak(w):
                directed.append(Edge(regular(i), regular(j), w))

    undirected = [
        Edge(regular(i), regular(j), opt.total_power, directed=False)
        for (i, j), opt in _pair_optima(oracle, channel, pair_optimizer).items()
        if opt.feasible
    ]
    logger.debug(f"Mixed total graph: {len(directed)} directed, {len(undirected)} undirected edges")
    return MixedGraph(
        regular_nodes=tuple(regular(i) for i in range(n)),
        starred_nodes=tuple(star(i) for i in range(n)),
        directed_edges=tuple(directed),
        undirected_edges=tuple(undirected),
    )


def build_mixed_test_graph(rates: Sequence[float], oracle: EntropyOracle, channel: ChannelModel,
                           pair_optimizer: PairOptimizer) -> MixedGraph:
    """Generalized pairwise property test graph G_M(R), isolated nodes removed."""
    _check_rates(rates, oracle)
    n = oracle.n
    H = oracle.conditionals
    directed = []
    undirected = []
    for i in range(n):
        if rates[i] >= oracle.marginals[i] - THRESHOLD_SLACK:
            directed.append(Edge(star(i), regular(i), channel.transmit_power(i, float(oracle.marginals[i]))))
        for j in range(n):
            if j != i and rates[i] >= H[i, j] - THRESHOLD_SLACK:
                directed.append(Edge(regular(j), regular(i), channel.transmit_power(i, float(H[i, j]))))
    for i in range(n):
        for j in range(i + 1, n):
            if oracle.in_pair_region(i, j, rates[i], rates[j]):
                opt = pair_optimizer(oracle, channel, i, j)
                if opt.feasible:
                    undirected.append(Edge(regular(i), regular(j), opt.total_power, directed=False))
    full = MixedGraph(
        regular_nodes=tuple(regular(i) for i in range(n)),
        starred_nodes=tuple(star(i) for i in range(n)),
        directed_edges=tuple(directed),
        undirected_edges=tuple(undirected),
    )
    return full.without_isolated_nodes()


def weight_transform(graph: MixedGraph) -> Tuple[MixedGraph, float]:
    """W'_A = L - W_A and W'_E = 2L - W_E with L = 1 + sum |w|."""
    lam = 1.0 + math.fsum(abs(e.weight) for e in graph.edges)
    transformed = MixedGraph(
        regular_nodes=graph.regular_nodes,
        starred_nodes=graph.starred_nodes,
        directed_edges=tuple(e.reweighted(lam - e.weight) for e in graph.directed_edges),
        undirected_edges=tuple(e.reweighted(2 * lam - e.weight) for e in graph.undirected_edges),
    )
    return transformed, lam


def transformed_edge(edge: Edge, transformed: MixedGraph) -> Edge:
    """Counterpart of `edge` in a weight-transformed graph."""
    found = transformed.directed_edge(edge.tail, edge.head) if edge.directed else transformed.undirected_edge(edge.tail, edge.head)
    if found is None:
        raise InvalidArgumentError(f"edge {edge.tail}-{edge.head} has no counterpart")
    return found
