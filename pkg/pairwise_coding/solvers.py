"""
Exact combinatorial solvers
===========================

- min_weight_arborescence: Chu-Liu/Edmonds contraction with deterministic ties
- min_weight_matching: subset dynamic programming, networkx blossom beyond the DP limit
- min_weight_strict_matching_forest: best-first branch-and-bound with a Lagrangian arborescence bound
- brute_force_enumerate: definition-level enumeration used as a test oracle

Ties are broken lexicographically on (weight, tail, head) everywhere.
"""

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from .config import (
    BRUTE_FORCE_LIMIT,
    BRUTE_FORCE_MATCHING_LIMIT,
    DEFAULT_SMF_BUDGET_SECS,
    DP_MATCHING_LIMIT,
    EXACT_SMF_LIMIT,
    SMF_CHILD_ITERATIONS,
    SMF_PRUNE_TOL,
    SMF_ROOT_ITERATIONS,
    SMF_STALL_LIMIT,
    SMF_STEP_SCALE,
)
from .exceptions import (
    InfeasibleMatchingError,
    InvalidArgumentError,
    NoArborescenceError,
    NoStrictMatchingForestError,
    OracleSizeError,
    SolverBudgetExceededError,
)
from .graphs import Edge, MixedGraph, Node, SubgraphSelection, head_count, is_uug_acyclic

logger = logging.getLogger(__name__)

# (tail, head, weight, arc id)
Arc = Tuple[int, int, float, int]


# ============================================================================
# Result types
# ============================================================================

@dataclass(frozen=True)
class Arborescence:
    root: Node
    selection: SubgraphSelection

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return self.selection.edges

    @property
    def weight(self) -> float:
        return self.selection.weight

    def incoming(self) -> Dict[Node, Edge]:
        """inc(v): the unique edge entering each non-root node."""
        return {e.head: e for e in self.edges}


@dataclass(frozen=True)
class Matching:
    selection: SubgraphSelection
    unmatched: Tuple[Node, ...]
    leftover_cost: float = 0.0

    @property
    def pairs(self) -> Tuple[Tuple[Node, Node], ...]:
        return tuple((e.tail, e.head) for e in self.selection.edges)

    @property
    def weight(self) -> float:
        return self.selection.weight + self.leftover_cost


@dataclass(frozen=True)
class MatchingForest:
    selection: SubgraphSelection
    strict: bool
    exact: bool = True
    nodes_explored: int = 0

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return self.selection.edges

    @property
    def weight(self) -> float:
        return self.selection.weight


# ============================================================================
# Arborescence
# ============================================================================

def _find_cycle(parent: Sequence[int], root: int) -> Optional[List[int]]:
    """First cycle of the parent-pointer graph, walking from nodes in index order."""
    state = [0] * len(parent)  # 0 unseen, 1 on the current walk, 2 settled
    state[root] = 2
    for start in range(len(parent)):
        path = []
        v = start
        while state[v] == 0:
            state[v] = 1
            path.append(v)
            v = parent[v]
        if state[v] == 1:
            return path[path.index(v):]
        for u in path:
            state[u] = 2
    return None


def _edmonds(num_nodes: int, root: int, arcs: Sequence[Arc]) -> Optional[List[int]]:
    """
    Minimum arborescence by repeated cheapest-in-arc selection and cycle contraction.
    Returns the chosen arc ids, or None when some node has no way in.
    """
    best: Dict[int, Arc] = {}
    for arc in arcs:
        u, v, w, k = arc
        if v == root or u == v:
            continue
        if v not in best or (w, k) < (best[v][2], best[v][3]):
            best[v] = arc
    if len(best) != num_nodes - 1:
        return None

    parent = [root] * num_nodes
    for v, arc in best.items():
        parent[v] = arc[0]
    cycle_nodes = _find_cycle(parent, root)
    if cycle_nodes is None:
        return sorted(arc[3] for arc in best.values())

    cycle = set(cycle_nodes)
    label = {}
    for v in range(num_nodes):
        if v not in cycle:
            label[v] = len(label)
    merged = len(label)
    for v in cycle:
        label[v] = merged

    contracted: List[Arc] = []
    entering: Dict[int, int] = {}
    for u, v, w, k in arcs:
        if u in cycle and v in cycle:
            continue
        if v in cycle:
            contracted.append((label[u], merged, w - best[v][2], k))
            entering[k] = v
        else:
            contracted.append((label[u], label[v], w, k))

    inner = _edmonds(merged + 1, label[root], contracted)
    if inner is None:
        return None
    broken = next(entering[k] for k in inner if k in entering)
    return sorted(inner + [best[v][3] for v in cycle if v != broken])


def min_weight_arborescence(graph: MixedGraph, root: Node) -> Arborescence:
    """Exact minimum-weight spanning arborescence of a digraph rooted at `root`."""
    if not graph.is_digraph:
        raise InvalidArgumentError("arborescences are defined on digraphs only")
    if not graph.has_node(root):
        raise InvalidArgumentError(f"root {root} is not in the graph")

    reach = nx.descendants(graph.to_networkx(), root) | {root}
    missing = [v for v in graph.nodes if v not in reach]
    if missing:
        raise NoArborescenceError(min(missing), root)

    index = {v: k for k, v in enumerate(graph.nodes)}
    ordered = sorted(graph.directed_edges, key=lambda e: e.sort_key)
    arcs = [(index[e.tail], index[e.head], e.weight, k) for k, e in enumerate(ordered)]
    chosen = _edmonds(len(index), index[root], arcs)
    if chosen is None:
        raise NoArborescenceError(root, root)
    return Arborescence(root, SubgraphSelection(graph, tuple(ordered[k] for k in chosen)))


# ============================================================================
# Matching
# ============================================================================

def _single_options(nodes: Sequence[Node], single_costs: Optional[Mapping[Node, float]]) -> List[Optional[float]]:
    if single_costs is None:
        return [0.0] * len(nodes)
    return [single_costs.get(v) for v in nodes]


def _dp_matching(graph: MixedGraph, singles: List[Optional[float]], max_singles: int):
    nodes = graph.regular_nodes
    m = len(nodes)
    pos = {v: k for k, v in enumerate(nodes)}
    adj: List[List[Tuple[int, float, Edge]]] = [[] for _ in range(m)]
    for e in graph.undirected_edges:
        a, b = pos[e.tail], pos[e.head]
        adj[a].append((b, e.weight, e))
        adj[b].append((a, e.weight, e))
    for lst in adj:
        lst.sort(key=lambda item: item[0])

    @lru_cache(maxsize=None)
    def best(mask: int, singles_left: int) -> Tuple[float, Optional[Tuple[int, ...]]]:
        if mask == 0:
            return 0.0, None
        a = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << a)
        result = (math.inf, None)
        if singles_left and singles[a] is not None:
            cand = singles[a] + best(rest, singles_left - 1)[0]
            if cand < result[0]:
                result = (cand, (a,))
        for b, w, _ in adj[a]:
            if rest >> b & 1:
                cand = w + best(rest & ~(1 << b), singles_left)[0]
                if cand < result[0]:
                    result = (cand, (a, b))
        return result

    full = (1 << m) - 1
    total, _ = best(full, max_singles)
    if math.isinf(total):
        raise InfeasibleMatchingError(f"no matching covers all {m} nodes")

    edges, unmatched, leftover = [], [], 0.0
    mask, left = full, max_singles
    while mask:
        _, choice = best(mask, left)
        if len(choice) == 1:
            a = choice[0]
            unmatched.append(nodes[a])
            leftover += singles[a]
            mask &= ~(1 << a)
            left -= 1
        else:
            a, b = choice
            edges.append(next(e for c, _, e in adj[a] if c == b))
            mask &= ~((1 << a) | (1 << b))
    best.cache_clear()
    return edges, unmatched, leftover


def _blossom_matching(graph: MixedGraph, singles: List[Optional[float]], max_singles: int):
    """Dummy-node reduction onto networkx's minimum-weight maximum-cardinality matching."""
    nodes = graph.regular_nodes
    g = nx.Graph()
    g.add_nodes_from(nodes)
    for e in graph.undirected_edges:
        g.add_edge(e.tail, e.head, weight=e.weight, edge=e)
    if max_singles == 1:
        g.add_node('leftover')
        for v, cost in zip(nodes, singles):
            if cost is not None:
                g.add_edge(v, 'leftover', weight=cost)
    elif max_singles > 1:
        clones = [('clone', v) for v in nodes]
        for v, clone, cost in zip(nodes, clones, singles):
            g.add_node(clone)
            if cost is not None:
                g.add_edge(v, clone, weight=cost)
        for a, b in itertools.combinations(clones, 2):
            g.add_edge(a, b, weight=0.0)

    matching = nx.min_weight_matching(g, weight='weight')
    matched = {x for pair in matching for x in pair}
    if any(v not in matched for v in nodes):
        raise InfeasibleMatchingError(f"no matching covers all {len(nodes)} nodes")

    edges, unmatched, leftover = [], [], 0.0
    for u, v in matching:
        data = g.edges[u, v]
        if 'edge' in data:
            edges.append(data['edge'])
        elif isinstance(u, Node) or isinstance(v, Node):
            node = u if isinstance(u, Node) else v
            unmatched.append(node)
            leftover += data['weight']
    return edges, sorted(unmatched), leftover


def min_weight_matching(graph: MixedGraph, require_perfect: bool = True,
                        single_costs: Optional[Mapping[Node, float]] = None) -> Matching:
    """
    Minimum-weight matching on the regular nodes of an undirected graph.

    With require_perfect, an odd node count leaves exactly one node unmatched,
    charged single_costs[node]. Without it, any node listed in single_costs may
    stay unmatched at that charge.
    """
    if graph.directed_edges:
        raise InvalidArgumentError("matching needs an undirected graph")
    m = len(graph.regular_nodes)
    singles = _single_options(graph.regular_nodes, single_costs)
    if require_perfect:
        max_singles = m % 2
    else:
        max_singles = m

    if m <= DP_MATCHING_LIMIT:
        edges, unmatched, leftover = _dp_matching(graph, singles, max_singles)
    else:
        logger.debug(f"{m} nodes exceed the subset-DP limit, using blossom matching")
        edges, unmatched, leftover = _blossom_matching(graph, singles, max_singles)
    return Matching(SubgraphSelection(graph, tuple(edges)), tuple(unmatched), leftover)


# ============================================================================
# Strict matching forest
# ============================================================================

Choice = Tuple[str, int]
PairKey = Tuple[int, int]


def _pair_key(a: int, b: int) -> PairKey:
    return (a, b) if a < b else (b, a)


def _cheaper(e: Edge, other: Optional[Edge]) -> bool:
    return other is None or e.sort_key < other.sort_key


class _StrictForestSearch:
    """
    Best-first branch-and-bound over undirected pairings.

    A strict matching forest is an arborescence from a virtual root in which
    each regular node hangs off the root (its starred edge, or one half of an
    undirected pairing) or off another regular node (a directed edge).
    Dropping the rule that both halves of a pairing are taken together leaves
    a minimum arborescence problem. Lagrange multipliers on that coupling,
    tuned by subgradient steps, tighten the bound; a branch forces or forbids
    one pairing and starts from its parent's multipliers.
    """

    def __init__(self, graph: MixedGraph, deadline: Optional[float]):
        self.graph = graph
        self.nodes = graph.regular_nodes
        self.m = len(self.nodes)
        self.pos = {v: k for k, v in enumerate(self.nodes)}
        self.deadline = deadline

        # Only the cheapest of any parallel edges can appear in an optimum.
        self.starred: List[Optional[Edge]] = [None] * self.m
        self.arcs_in: List[Dict[int, Edge]] = [{} for _ in range(self.m)]
        self.pair_edges: Dict[PairKey, Edge] = {}
        for v in self.nodes:
            k = self.pos[v]
            for e in graph.in_edges[v]:
                if e.tail.starred:
                    if _cheaper(e, self.starred[k]):
                        self.starred[k] = e
                else:
                    j = self.pos[e.tail]
                    if _cheaper(e, self.arcs_in[k].get(j)):
                        self.arcs_in[k][j] = e
            for e in graph.incident_undirected[v]:
                key = _pair_key(k, self.pos[e.head if e.tail == v else e.tail])
                if _cheaper(e, self.pair_edges.get(key)):
                    self.pair_edges[key] = e
        self.partners: List[List[int]] = [[] for _ in range(self.m)]
        for a, b in sorted(self.pair_edges):
            self.partners[a].append(b)
            self.partners[b].append(a)

        self.best_weight = math.inf
        self.best_edges: Optional[Tuple[Edge, ...]] = None
        self.explored = 0
        self.timed_out = False

    def run(self):
        for k in range(self.m):
            if self.starred[k] is None and not self.arcs_in[k] and not self.partners[k]:
                raise NoStrictMatchingForestError(f"regular node {self.nodes[k]} is the head of no edge")

        self._complete(())
        order = itertools.count()
        heap = []
        root = self._evaluate((), frozenset(), {}, SMF_ROOT_ITERATIONS, -math.inf)
        if root is not None:
            heapq.heappush(heap, (root[0], next(order), (), frozenset(), root[1], root[2]))

        while heap:
            if self.deadline is not None and time.monotonic() > self.deadline:
                logger.warning(f"Strict matching forest search hit its time budget after {self.explored} nodes")
                self.timed_out = True
                return
            bound, _, forced, forbidden, multipliers, key = heapq.heappop(heap)
            if self._pruned(bound):
                break
            for child_forced, child_forbidden in ((forced + (key,), forbidden), (forced, forbidden | {key})):
                child = self._evaluate(child_forced, child_forbidden, multipliers, SMF_CHILD_ITERATIONS, bound)
                if child is not None:
                    heapq.heappush(heap, (child[0], next(order), child_forced, child_forbidden, child[1], child[2]))

    def _pruned(self, bound: float) -> bool:
        if math.isinf(self.best_weight):
            return False
        return bound >= self.best_weight - SMF_PRUNE_TOL * max(1.0, abs(self.best_weight))

    def _relax(self, partner: Dict[int, int], forbidden: FrozenSet[PairKey],
               multipliers: Dict[PairKey, float], pairs_allowed: bool = True):
        """Minimum arborescence with decoupled pair halves; returns (value, choice per node) or None."""
        root = self.m
        arcs: List[Arc] = []
        meta: List[Choice] = []
        for k in range(self.m):
            if k in partner:
                j = partner[k]
                arcs.append((root, k, self.pair_edges[_pair_key(k, j)].weight / 2.0, len(arcs)))
                meta.append(('pair', j))
                continue

            option: Optional[Tuple[float, str, int]] = None
            if self.starred[k] is not None:
                option = (self.starred[k].weight, 'star', -1)
            if pairs_allowed:
                for j in self.partners[k]:
                    key = _pair_key(k, j)
                    if j in partner or key in forbidden:
                        continue
                    shift = multipliers.get(key, 0.0)
                    cost = self.pair_edges[key].weight / 2.0 + (shift if k < j else -shift)
                    if option is None or cost < option[0]:
                        option = (cost, 'pair', j)

            limit = math.inf
            if option is not None:
                limit = option[0]
                arcs.append((root, k, option[0], len(arcs)))
                meta.append((option[1], option[2]))
            # An in-arc no cheaper than the root arc can always be swapped for it.
            for j, e in self.arcs_in[k].items():
                if e.weight < limit:
                    arcs.append((j, k, e.weight, len(arcs)))
                    meta.append(('arc', j))

        chosen = _edmonds(self.m + 1, root, arcs)
        if chosen is None:
            return None
        choice: List[Choice] = [('star', -1)] * self.m
        for idx in chosen:
            choice[arcs[idx][1]] = meta[idx]
        return math.fsum(arcs[idx][2] for idx in chosen), choice

    @staticmethod
    def _coupling_gaps(choice: List[Choice], partner: Dict[int, int]) -> Dict[PairKey, int]:
        gaps: Dict[PairKey, int] = {}
        for k, (kind, j) in enumerate(choice):
            if kind != 'pair' or k in partner or choice[j] == ('pair', k):
                continue
            key = _pair_key(k, j)
            gaps[key] = gaps.get(key, 0) + (1 if k < j else -1)
        return gaps

    def _evaluate(self, forced: Tuple[PairKey, ...], forbidden: FrozenSet[PairKey],
                  multipliers: Dict[PairKey, float], iterations: int, floor: float):
        """
        Bound one subproblem. Returns (bound, multipliers, pairing to branch on),
        or None when the subproblem is infeasible, pruned or solved outright.
        """
        self.explored += 1
        partner: Dict[int, int] = {}
        for a, b in forced:
            partner[a] = b
            partner[b] = a

        multipliers = dict(multipliers)
        best_value, best_multipliers, best_choice = -math.inf, multipliers, None
        scale, stall = SMF_STEP_SCALE, 0
        for _ in range(iterations):
            relaxed = self._relax(partner, forbidden, multipliers)
            if relaxed is None:
                return None
            value, choice = relaxed
            gaps = self._coupling_gaps(choice, partner)
            if not gaps:
                # Multipliers cancel on a coupled solution, so it meets its own lower bound.
                self._offer(choice)
                return None
            if value > best_value:
                best_value, best_multipliers, best_choice = value, dict(multipliers), choice
                stall = 0
            else:
                stall += 1
                if stall >= SMF_STALL_LIMIT:
                    scale /= 2.0
                    stall = 0
            if self._pruned(max(best_value, floor)):
                return None

            if math.isinf(self.best_weight):
                target = value + 0.1 * max(1.0, abs(value))
            else:
                target = self.best_weight
            step = scale * (target - value) / sum(g * g for g in gaps.values())
            for key, g in gaps.items():
                multipliers[key] = multipliers.get(key, 0.0) + step * g

        mutual = tuple(
            (k, j) for k, (kind, j) in enumerate(best_choice)
            if kind == 'pair' and k < j and k not in partner and best_choice[j] == ('pair', k)
        )
        self._complete(forced + mutual)
        bound = max(best_value, floor)
        if self._pruned(bound):
            return None
        branch = next(
            _pair_key(k, j) for k, (kind, j) in enumerate(best_choice)
            if kind == 'pair' and k not in partner and best_choice[j] != ('pair', k)
        )
        return bound, best_multipliers, branch

    def _complete(self, pairs: Tuple[PairKey, ...]):
        """Primal heuristic: keep the given pairings, cover everything else by starred or directed edges."""
        partner: Dict[int, int] = {}
        for a, b in pairs:
            partner[a] = b
            partner[b] = a
        relaxed = self._relax(partner, frozenset(), {}, pairs_allowed=False)
        if relaxed is not None:
            self._offer(relaxed[1])

    def _offer(self, choice: List[Choice]):
        edges: List[Edge] = []
        for k, (kind, j) in enumerate(choice):
            if kind == 'star':
                edges.append(self.starred[k])
            elif kind == 'arc':
                edges.append(self.arcs_in[k][j])
            elif k < j:
                edges.append(self.pair_edges[(k, j)])
        weight = math.fsum(e.weight for e in edges)
        if weight < self.best_weight:
            self.best_weight = weight
            self.best_edges = tuple(edges)


def min_weight_strict_matching_forest(graph: MixedGraph, time_budget: Optional[float] = None) -> MatchingForest:
    """
    Exact minimum-weight strict matching forest (every regular node the head of
    exactly one edge). Beyond EXACT_SMF_LIMIT regular nodes, or when the time
    budget runs out, the best forest found so far is returned with exact=False.
    """
    m = len(graph.regular_nodes)
    if m > EXACT_SMF_LIMIT and time_budget is None:
        time_budget = DEFAULT_SMF_BUDGET_SECS
        logger.info(f"{m} regular nodes exceed the exact limit, searching for at most {time_budget}s")
    deadline = time.monotonic() + time_budget if time_budget is not None else None

    search = _StrictForestSearch(graph, deadline)
    search.run()
    logger.debug(f"Strict matching forest search explored {search.explored} nodes")

    if search.best_edges is None:
        if search.timed_out:
            raise SolverBudgetExceededError(f"no strict matching forest found within {time_budget}s")
        raise NoStrictMatchingForestError(f"no strict matching forest covers the {m} regular nodes")
    return MatchingForest(
        SubgraphSelection(graph, search.best_edges),
        strict=True,
        exact=not search.timed_out,
        nodes_explored=search.explored,
    )


def is_matching_forest(selection: SubgraphSelection) -> bool:
    return all(head_count(selection, v) <= 1 for v in selection.parent.nodes) and is_uug_acyclic(selection)


def is_strict_matching_forest(selection: SubgraphSelection) -> bool:
    return is_matching_forest(selection) and all(
        head_count(selection, v) == 1 for v in selection.parent.regular_nodes
    )


# ============================================================================
# Brute-force oracles
# ============================================================================

def _selection_key(item):
    return item.weight, tuple((e.tail, e.head) for e in item.selection.edges)


def _enumerate_arborescences(graph: MixedGraph, root: Node) -> List[Arborescence]:
    others = [v for v in graph.nodes if v != root]
    choices = [graph.in_edges[v] for v in others]
    found = []
    for combo in itertools.product(*choices):
        t = nx.DiGraph()
        t.add_nodes_from(graph.nodes)
        t.add_edges_from((e.tail, e.head) for e in combo)
        if nx.is_arborescence(t) and t.in_degree(root) == 0:
            found.append(Arborescence(root, SubgraphSelection(graph, combo)))
    return found


def _enumerate_matchings(graph: MixedGraph, single_costs: Optional[Mapping[Node, float]]) -> List[Matching]:
    nodes = list(graph.regular_nodes)
    max_singles = len(nodes) % 2
    costs = _single_options(nodes, single_costs)
    cost_of = dict(zip(nodes, costs))
    found = []

    def extend(remaining: List[Node], edges: List[Edge], unmatched: List[Node]):
        if not remaining:
            leftover = math.fsum(cost_of[v] for v in unmatched)
            found.append(Matching(SubgraphSelection(graph, tuple(edges)), tuple(unmatched), leftover))
            return
        a, rest = remaining[0], remaining[1:]
        if len(unmatched) < max_singles and cost_of[a] is not None:
            extend(rest, edges, unmatched + [a])
        for b in rest:
            e = graph.undirected_edge(a, b)
            if e is not None:
                extend([v for v in rest if v != b], edges + [e], unmatched)

    extend(nodes, [], [])
    return found


def _enumerate_forests(graph: MixedGraph, strict: bool) -> List[MatchingForest]:
    nodes = list(graph.regular_nodes)
    found = []

    def extend(k: int, decided: Dict[Node, Optional[Edge]]):
        if k == len(nodes):
            edges = tuple(dict.fromkeys(e for e in decided.values() if e is not None))
            selection = SubgraphSelection(graph, edges)
            if not is_matching_forest(selection):
                return
            is_strict = all(head_count(selection, v) == 1 for v in graph.regular_nodes)
            if is_strict or not strict:
                found.append(MatchingForest(selection, strict=is_strict))
            return
        v = nodes[k]
        if v in decided:
            extend(k + 1, decided)
            return
        if not strict:
            extend(k + 1, {**decided, v: None})
        for e in graph.in_edges[v]:
            extend(k + 1, {**decided, v: e})
        for e in graph.incident_undirected[v]:
            other = e.head if e.tail == v else e.tail
            if other not in decided:
                extend(k + 1, {**decided, v: e, other: e})

    extend(0, {})
    return found


def brute_force_enumerate(graph: MixedGraph, kind: str, root: Optional[Node] = None,
                          single_costs: Optional[Mapping[Node, float]] = None) -> list:
    """
    Every feasible structure of `kind` ('arborescence', 'matching', 'smf' or
    'forest'), checked against the definitions and sorted by weight.
    """
    if kind == 'arborescence':
        if root is None:
            raise InvalidArgumentError("arborescence enumeration needs a root")
        if len(graph.nodes) > BRUTE_FORCE_LIMIT:
            raise OracleSizeError(f"{len(graph.nodes)} nodes exceed the enumeration cap {BRUTE_FORCE_LIMIT}")
        found = _enumerate_arborescences(graph, root)
    elif kind == 'matching':
        if len(graph.regular_nodes) > BRUTE_FORCE_MATCHING_LIMIT:
            raise OracleSizeError(f"{len(graph.regular_nodes)} nodes exceed the enumeration cap {BRUTE_FORCE_MATCHING_LIMIT}")
        found = _enumerate_matchings(graph, single_costs)
    elif kind in ('smf', 'forest'):
        if len(graph.regular_nodes) > BRUTE_FORCE_LIMIT:
            raise OracleSizeError(f"{len(graph.regular_nodes)} regular nodes exceed the enumeration cap {BRUTE_FORCE_LIMIT}")
        found = _enumerate_forests(graph, strict=(kind == 'smf'))
    else:
        raise InvalidArgumentError(f"unknown enumeration kind '{kind}'")
    return sorted(found, key=_selection_key)
