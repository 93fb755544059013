"""
Rate and power allocation.

Turns solver outputs into assignments: the noiseless optimum (minimum over
roots of rooted arborescences), the noisy optimum (minimum strict matching
forest of the mixed total graph), both matching baselines, the closed-form
per-pair rate/power optimizer, individual transmission, and the convex
n-source Slepian-Wolf power oracle.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

import cvxpy as cp
import numpy as np

from .config import POWER_SLACK, SW_N_LIMIT
from .exceptions import (
    InfeasibleAllocationError,
    InfeasibleMatchingError,
    InvalidArgumentError,
    NoStrictMatchingForestError,
    OracleSizeError,
)
from .graphs import (
    Edge,
    EdgeKind,
    MixedGraph,
    SubgraphSelection,
    build_matching_graph,
    build_mixed_total_graph,
    build_total_digraph,
    regular,
    rooted_variant,
    star,
)
from .model import LN2, ChannelModel, EntropyOracle
from .solvers import min_weight_arborescence, min_weight_matching, min_weight_strict_matching_forest

logger = logging.getLogger(__name__)


class Method(str, Enum):
    OPTIMAL = 'optimal'
    MATCHING = 'matching'
    INDIVIDUAL = 'individual'
    SW_N_ORACLE = 'sw_n_oracle'


# ============================================================================
# Assignment types
# ============================================================================

@dataclass(frozen=True)
class RateAssignment:
    rates: Tuple[float, ...]
    method: Method
    witness: Optional[SubgraphSelection] = None
    exact: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'rates', tuple(float(r) for r in self.rates))

    @property
    def n(self) -> int:
        return len(self.rates)

    @property
    def sum(self) -> float:
        return math.fsum(self.rates)

    def witness_edges(self) -> List[dict]:
        return [e.to_dict() for e in self.witness.edges] if self.witness is not None else []

    def to_dict(self) -> dict:
        return {
            'method': self.method.value,
            'rates': list(self.rates),
            'witness_edges': self.witness_edges(),
            'sum': self.sum,
        }


@dataclass(frozen=True)
class PowerAssignment:
    powers: Tuple[float, ...]
    rates: RateAssignment
    peak_power: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, 'powers', tuple(float(p) for p in self.powers))
        if len(self.powers) != self.rates.n:
            raise InvalidArgumentError(f"{len(self.powers)} powers for {self.rates.n} rates")

    @property
    def method(self) -> Method:
        return self.rates.method

    @property
    def witness(self) -> Optional[SubgraphSelection]:
        return self.rates.witness

    @property
    def exact(self) -> bool:
        return self.rates.exact

    @property
    def sum(self) -> float:
        return math.fsum(self.powers)

    @property
    def feasible(self) -> bool:
        return all(p <= self.peak_power + POWER_SLACK for p in self.powers)

    def to_dict(self) -> dict:
        data = self.rates.to_dict()
        data['powers'] = list(self.powers)
        data['sum'] = self.sum
        return data


@dataclass(frozen=True)
class PairOptimum:
    """Best rate/power split of the pair (i, j) on the face R_i + R_j = H(X_i, X_j)."""
    i: int
    j: int
    rate_i: float
    rate_j: float
    power_i: float
    power_j: float
    feasible: bool

    @property
    def total_power(self) -> float:
        return self.power_i + self.power_j

    def rate_of(self, k: int) -> float:
        if k == self.i:
            return self.rate_i
        if k == self.j:
            return self.rate_j
        raise InvalidArgumentError(f"node {k} is not in the pair ({self.i}, {self.j})")


def _powers(rates, channel: ChannelModel) -> Tuple[float, ...]:
    return tuple(channel.transmit_power(i, r) for i, r in enumerate(rates))


# ============================================================================
# Noiseless
# ============================================================================

def optimal_noiseless_rates(oracle: EntropyOracle) -> RateAssignment:
    """
    Minimum sum rate under the pairwise property.

    Solves a minimum-weight arborescence of G_{i*} for every root i and keeps
    the cheapest; each node's rate is the weight of its incoming edge. The
    lowest root wins ties.
    """
    n = oracle.n
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 sources, got {n}")
    total = build_total_digraph(oracle)

    best = None
    totals = []
    for i in range(n):
        arb = min_weight_arborescence(rooted_variant(total, i), star(i))
        totals.append(arb.weight)
        if best is None or arb.weight < best.weight:
            best = arb
    logger.debug(f"Rooted arborescence totals span [{min(totals):.9g}, {max(totals):.9g}]")

    rates = [0.0] * n
    for head, e in best.incoming().items():
        rates[head.index] = e.weight
    witness = SubgraphSelection(total, best.edges)
    return RateAssignment(tuple(rates), Method.OPTIMAL, witness)


def matching_rates_noiseless(oracle: EntropyOracle) -> RateAssignment:
    """
    Minimum-weight perfect matching on joint-entropy weights. Each pair sits
    at the corner where its lower index sends the marginal; an odd leftover
    node sends its marginal alone.
    """
    n = oracle.n
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 sources, got {n}")
    graph = build_matching_graph(n, oracle.joint_entropy)
    singles = {regular(i): float(oracle.marginals[i]) for i in range(n)}
    matching = min_weight_matching(graph, require_perfect=True, single_costs=singles)

    rates = list(oracle.marginals)
    for a, b in matching.pairs:
        rates[b.index] = oracle.conditional_entropy(b.index, a.index)
    return RateAssignment(tuple(rates), Method.MATCHING, matching.selection)


def individual_baseline(oracle: EntropyOracle,
                        channel: Optional[ChannelModel] = None) -> Union[RateAssignment, PowerAssignment]:
    """Every source at its marginal entropy; with a channel, the matching powers too."""
    n = oracle.n
    starred = MixedGraph(
        regular_nodes=tuple(regular(i) for i in range(n)),
        starred_nodes=tuple(star(i) for i in range(n)),
        directed_edges=tuple(Edge(star(i), regular(i), float(oracle.marginals[i])) for i in range(n)),
    )
    assignment = RateAssignment(
        tuple(oracle.marginals), Method.INDIVIDUAL, SubgraphSelection(starred, starred.directed_edges)
    )
    if channel is None:
        return assignment
    return PowerAssignment(_powers(assignment.rates, channel), assignment, channel.peak_power)


# ============================================================================
# Per-pair optimizer
# ============================================================================

def per_pair_power_optimum(oracle: EntropyOracle, channel: ChannelModel, i: int, j: int) -> PairOptimum:
    """
    Minimize Q_i(R_i) + Q_j(R_j) over SW_ij within the peak cap.

    The optimum lies on the dominant face R_i + R_j = H. Stationarity gives
    R_i = H/2 + log2(gamma_i / gamma_j) / 2. That point is clamped first to the
    Slepian-Wolf corners, then to the rate caps log2(1 + gamma P_max) of both
    nodes. An empty interval means no point of the face meets both caps.
    """
    if i == j:
        raise InvalidArgumentError("a pair needs two distinct nodes")
    ent = oracle.pairwise_entropies(i, j)
    H = ent.H_ij
    gamma_i, gamma_j = channel.gains[i], channel.gains[j]

    target = H / 2 + 0.5 * math.log2(gamma_i / gamma_j)
    if channel.clamp_rates_at_zero:
        # clamped powers are flat below zero rate
        target = min(max(target, min(0.0, H)), max(0.0, H))

    lower = max(ent.H_i_given_j, H - channel.rate_cap(j))
    upper = min(H - ent.H_j_given_i, channel.rate_cap(i))
    if lower > upper:
        logger.debug(f"Pair ({i}, {j}) has no face point under P_max={channel.peak_power}")
        return PairOptimum(i, j, math.nan, math.nan, math.inf, math.inf, feasible=False)

    rate_i = min(max(target, lower), upper)
    rate_j = H - rate_i
    rate_i, rate_j = channel.effective_rate(rate_i), channel.effective_rate(rate_j)
    return PairOptimum(
        i, j,
        rate_i, rate_j,
        channel.transmit_power(i, rate_i), channel.transmit_power(j, rate_j),
        feasible=True,
    )


def _all_pair_optima(oracle: EntropyOracle, channel: ChannelModel) -> Dict[Tuple[int, int], PairOptimum]:
    return {
        (i, j): per_pair_power_optimum(oracle, channel, i, j)
        for i, j in itertools.combinations(range(oracle.n), 2)
    }


# ============================================================================
# Noisy
# ============================================================================

def optimal_noisy_allocation(oracle: EntropyOracle, channel: ChannelModel,
                             time_budget: Optional[float] = None) -> PowerAssignment:
    """
    Minimum sum power under the generalized pairwise property.

    Extraction from the strict matching forest:
      (i* -> i)  R_i = H(X_i)
      (i, j)     the pair optimum
      (j -> i)   R_i = H(X_i | X_j)
    """
    n = oracle.n
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 sources, got {n}")
    total = build_mixed_total_graph(oracle, channel, per_pair_power_optimum)
    try:
        forest = min_weight_strict_matching_forest(total, time_budget=time_budget)
    except NoStrictMatchingForestError as e:
        raise InfeasibleAllocationError(f"no valid allocation under P_max={channel.peak_power}: {e}") from e

    rates = [math.nan] * n
    for e in forest.edges:
        if e.kind is EdgeKind.STARRED:
            rates[e.head.index] = float(oracle.marginals[e.head.index])
        elif e.kind is EdgeKind.UNDIRECTED:
            opt = per_pair_power_optimum(oracle, channel, e.tail.index, e.head.index)
            rates[e.tail.index] = opt.rate_i
            rates[e.head.index] = opt.rate_j
        else:
            rates[e.head.index] = oracle.conditional_entropy(e.head.index, e.tail.index)
    rates = [channel.effective_rate(r) for r in rates]

    if not forest.exact:
        logger.warning(f"Strict matching forest for n={n} is the best found within the budget, not proven optimal")
    assignment = RateAssignment(tuple(rates), Method.OPTIMAL, forest.selection, exact=forest.exact)
    return PowerAssignment(_powers(rates, channel), assignment, channel.peak_power)


def matching_allocation_noisy(oracle: EntropyOracle, channel: ChannelModel) -> PowerAssignment:
    """
    Minimum-weight matching on per-pair optimal power weights. Infeasible pairs
    are left out; a node left over sends its marginal alone if that fits P_max.
    """
    n = oracle.n
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 sources, got {n}")
    optima = _all_pair_optima(oracle, channel)

    def pair_weight(i: int, j: int) -> Optional[float]:
        opt = optima[(i, j)]
        return opt.total_power if opt.feasible else None

    graph = build_matching_graph(n, pair_weight)
    singles = {}
    for i in range(n):
        p = channel.transmit_power(i, float(oracle.marginals[i]))
        if channel.within_peak(p):
            singles[regular(i)] = p
    try:
        matching = min_weight_matching(graph, require_perfect=False, single_costs=singles)
    except InfeasibleMatchingError as e:
        raise InfeasibleAllocationError(f"matching baseline infeasible under P_max={channel.peak_power}") from e

    rates = [channel.effective_rate(float(h)) for h in oracle.marginals]
    for a, b in matching.pairs:
        opt = optima[(a.index, b.index)]
        rates[a.index], rates[b.index] = opt.rate_i, opt.rate_j
    assignment = RateAssignment(tuple(rates), Method.MATCHING, matching.selection)
    return PowerAssignment(_powers(rates, channel), assignment, channel.peak_power)


# ============================================================================
# Convex oracle
# ============================================================================

def sw_n_power_oracle(oracle: EntropyOracle, channel: ChannelModel) -> PowerAssignment:
    """
    Minimum sum power over the full n-source Slepian-Wolf region.

    Every nonempty subset S contributes sum_{i in S} R_i >= H(X_S | X_{S^c});
    the objective sum (2^R_i - 1) / gamma_i is convex, solved with cvxpy.
    """
    n = oracle.n
    if n > SW_N_LIMIT:
        raise OracleSizeError(f"n={n} exceeds the convex oracle limit of {SW_N_LIMIT} sources")

    subsets = [S for size in range(1, n + 1) for S in itertools.combinations(range(n), size)]
    A = np.zeros((len(subsets), n))
    b = np.empty(len(subsets))
    for row, S in enumerate(subsets):
        A[row, list(S)] = 1.0
        b[row] = oracle.subset_conditional_entropy(S)

    inv_gain = 1.0 / np.asarray(channel.gains)
    R = cp.Variable(n)
    objective = cp.Minimize(cp.sum(cp.multiply(inv_gain, cp.exp(LN2 * R) - 1)))
    constraints = [A @ R >= b]
    if math.isfinite(channel.peak_power):
        caps = np.array([channel.rate_cap(i) for i in range(n)])
        constraints.append(R <= caps)
    if channel.clamp_rates_at_zero:
        constraints.append(R >= 0)

    problem = cp.Problem(objective, constraints)
    try:
        problem.solve()
    except cp.error.SolverError as e:
        raise InfeasibleAllocationError(f"convex oracle failed for n={n}: {e}") from e
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise InfeasibleAllocationError(f"convex oracle status '{problem.status}' under P_max={channel.peak_power}")
    if problem.status == cp.OPTIMAL_INACCURATE:
        logger.warning(f"Convex oracle for n={n} returned an inaccurate optimum")

    rates = [channel.effective_rate(float(r)) for r in R.value]
    logger.debug(f"Convex oracle: {len(subsets)} subset constraints, objective {problem.value:.9g}")
    assignment = RateAssignment(tuple(rates), Method.SW_N_ORACLE, exact=problem.status == cp.OPTIMAL)
    return PowerAssignment(_powers(rates, channel), assignment, channel.peak_power)


def sw_n_rate_bound(oracle: EntropyOracle) -> float:
    """Noiseless counterpart of the convex oracle: the joint entropy H(X_1, ..., X_n)."""
    return oracle.joint_entropy_all()
