"""
Pairwise and generalized pairwise validity of rate assignments.

A checker builds the relevant test graph, decides validity by reachability
and returns a decode schedule that `simulate_decode` can replay.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx

from .allocation import per_pair_power_optimum
from .config import THRESHOLD_SLACK
from .exceptions import MalformedScheduleError
from .graphs import MixedGraph, PairOptimizer, build_mixed_test_graph, build_test_graph, parent_set, regular
from .model import ChannelModel, EntropyOracle

logger = logging.getLogger(__name__)

_VIRTUAL_ROOT = 'sink'


class StepKind(str, Enum):
    SOLO = 'solo'
    JOINT = 'joint'
    CONDITIONAL = 'conditional'


@dataclass(frozen=True)
class DecodeStep:
    kind: StepKind
    node: int
    partner: Optional[int] = None

    def to_dict(self) -> dict:
        data = {'kind': self.kind.value, 'node': self.node}
        if self.partner is not None:
            data['partner'] = self.partner
        return data

    def __str__(self):
        if self.kind is StepKind.SOLO:
            return f"solo({self.node})"
        if self.kind is StepKind.JOINT:
            return f"joint({self.node},{self.partner})"
        return f"conditional({self.node}|{self.partner})"


@dataclass(frozen=True)
class DecodeSchedule:
    steps: Tuple[DecodeStep, ...] = ()

    def decoded_nodes(self) -> List[int]:
        order = []
        for step in self.steps:
            order.append(step.node)
            if step.kind is StepKind.JOINT:
                order.append(step.partner)
        return order

    def __len__(self):
        return len(self.decoded_nodes())

    def to_list(self) -> List[dict]:
        return [s.to_dict() for s in self.steps]


@dataclass(frozen=True)
class ValidityResult:
    valid: bool
    schedule: Optional[DecodeSchedule] = None
    counterexample: Optional[int] = None
    reason: str = ''
    test_graph: Optional[MixedGraph] = field(default=None, repr=False, compare=False)

    def __bool__(self):
        return self.valid

    def to_dict(self) -> dict:
        return {
            'valid': self.valid,
            'schedule': self.schedule.to_list() if self.schedule is not None else None,
            'counterexample': self.counterexample,
            'reason': self.reason,
        }


# ============================================================================
# Pairwise (noiseless)
# ============================================================================

def _expand_conditionals(graph: MixedGraph, decoded: Set[int], steps: List[DecodeStep]):
    """Breadth-first along directed regular edges from everything already decoded."""
    g = graph.to_networkx()
    queue = deque(sorted(decoded))
    while queue:
        j = queue.popleft()
        for v in sorted(g.successors(regular(j))):
            if v.index not in decoded:
                decoded.add(v.index)
                steps.append(DecodeStep(StepKind.CONDITIONAL, v.index, j))
                queue.append(v.index)


def check_pairwise_valid(rates: Sequence[float], oracle: EntropyOracle) -> ValidityResult:
    """
    Valid iff every regular node of G(R) is reachable from a parent-set node.
    The schedule is a breadth-first forest: solo at the roots, conditional on
    tree edges.
    """
    graph = build_test_graph(rates, oracle)
    g = graph.to_networkx()
    g.add_node(_VIRTUAL_ROOT)
    for s in parent_set(graph):
        g.add_edge(_VIRTUAL_ROOT, s)

    steps = []
    decoded = set()
    for u, v in nx.bfs_edges(g, _VIRTUAL_ROOT):
        if u == _VIRTUAL_ROOT:
            continue
        if u.starred:
            steps.append(DecodeStep(StepKind.SOLO, v.index))
        else:
            steps.append(DecodeStep(StepKind.CONDITIONAL, v.index, u.index))
        decoded.add(v.index)

    missing = [i for i in range(oracle.n) if i not in decoded]
    if missing:
        return ValidityResult(
            False,
            counterexample=missing[0],
            reason=f"source {missing[0]} is not reachable from any fully rated source",
            test_graph=graph,
        )
    return ValidityResult(True, DecodeSchedule(tuple(steps)), test_graph=graph)


# ============================================================================
# Generalized pairwise (noisy)
# ============================================================================

def lemma_conditions(graph: MixedGraph, i: int) -> Dict[int, bool]:
    """
    Which of the four generalized-validity conditions hold at regular node i of G_M(R):
      1 joins an undirected edge
      2 has its starred edge
      3 is reachable from some starred node
      4 is reachable from a regular node that joins an undirected edge
    """
    v = regular(i)
    if not graph.has_node(v):
        return {1: False, 2: False, 3: False, 4: False}
    g = graph.to_networkx()
    ancestors = nx.ancestors(g, v)
    paired = {u for e in graph.undirected_edges for u in e.endpoints}
    return {
        1: v in paired,
        2: any(e.tail.starred for e in graph.in_edges[v]),
        3: any(u.starred for u in ancestors),
        4: any(u in paired for u in ancestors),
    }


def check_generalized_valid(rates: Sequence[float], oracle: EntropyOracle, channel: ChannelModel,
                            pair_optimizer: Optional[PairOptimizer] = None) -> ValidityResult:
    """
    Generalized pairwise validity: every node's power within P_max and at
    least one of the four graph conditions at every regular node of G_M(R).
    Seeds are solo and joint steps; directed edges then carry conditionals.
    """
    if pair_optimizer is None:
        pair_optimizer = per_pair_power_optimum

    over = [i for i, r in enumerate(rates) if not channel.within_peak(channel.transmit_power(i, r))]
    if over:
        return ValidityResult(
            False,
            counterexample=over[0],
            reason=f"source {over[0]} needs more than P_max={channel.peak_power}",
        )

    graph = build_mixed_test_graph(rates, oracle, channel, pair_optimizer)
    steps: List[DecodeStep] = []
    decoded: Set[int] = set()
    for e in graph.directed_edges:
        if e.tail.starred:
            steps.append(DecodeStep(StepKind.SOLO, e.head.index))
            decoded.add(e.head.index)
    for e in graph.undirected_edges:
        a, b = e.tail.index, e.head.index
        if a not in decoded and b not in decoded:
            steps.append(DecodeStep(StepKind.JOINT, a, b))
            decoded.update((a, b))
    _expand_conditionals(graph, decoded, steps)

    missing = [i for i in range(oracle.n) if i not in decoded]
    if missing:
        return ValidityResult(
            False,
            counterexample=missing[0],
            reason=f"source {missing[0]} meets none of the decodability conditions",
            test_graph=graph,
        )
    return ValidityResult(True, DecodeSchedule(tuple(steps)), test_graph=graph)


# ============================================================================
# Schedule replay
# ============================================================================

def simulate_decode(schedule: DecodeSchedule, rates: Sequence[float], oracle: EntropyOracle) -> bool:
    """
    Replay a schedule against the rate thresholds. Returns False when a step's
    rate requirement fails or a source is never decoded; a schedule that
    decodes a source twice or uses side information early is malformed.
    """
    n = oracle.n
    if len(rates) != n:
        raise MalformedScheduleError(f"rate vector has {len(rates)} entries, expected {n}")
    decoded: Set[int] = set()

    def claim(k: int):
        if not 0 <= k < n:
            raise MalformedScheduleError(f"step names unknown source {k}")
        if k in decoded:
            raise MalformedScheduleError(f"source {k} is decoded twice")
        decoded.add(k)

    ok = True
    for step in schedule.steps:
        i, j = step.node, step.partner
        if step.kind is StepKind.SOLO:
            claim(i)
            ok = ok and rates[i] >= oracle.marginal_entropy(i) - THRESHOLD_SLACK
        elif step.kind is StepKind.JOINT:
            if j is None or j == i:
                raise MalformedScheduleError(f"joint step at {i} needs a distinct partner")
            claim(i)
            claim(j)
            ok = ok and oracle.in_pair_region(i, j, rates[i], rates[j])
        else:
            if j is None or j == i:
                raise MalformedScheduleError(f"conditional step at {i} needs a distinct side source")
            if j not in decoded:
                raise MalformedScheduleError(f"side information {j} is used before it is decoded")
            claim(i)
            ok = ok and rates[i] >= oracle.conditional_entropy(i, j) - THRESHOLD_SLACK
    if not ok:
        logger.debug("Schedule replay hit a rate below its decoding threshold")
    return ok and len(decoded) == n
