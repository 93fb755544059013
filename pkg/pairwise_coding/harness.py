"""
Experiment runner: single-instance solve reports, noiseless sum-rate sweeps
and the noisy sum-power comparison table.

Sweeps and tables are deterministic for a fixed configuration: replication r
of every (n, c) cell uses seed derive_seed(seed, r), cells are emitted in
(n, c, replication) order whatever the worker count, and wall-clock times
never reach the CSV.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import pandas as pd
from pydantic import BaseModel, Field
from tqdm import tqdm

from .allocation import (
    Method,
    PowerAssignment,
    RateAssignment,
    individual_baseline,
    matching_allocation_noisy,
    matching_rates_noiseless,
    optimal_noiseless_rates,
    optimal_noisy_allocation,
    sw_n_power_oracle,
    sw_n_rate_bound,
)
from .config import CSV_FLOAT_FORMAT, SANDWICH_SLACK, SW_N_LIMIT, THRESHOLD_SLACK, ExperimentConfig, Mode
from .exceptions import (
    InfeasibleAllocationError,
    InvalidAllocationError,
    InvalidArgumentError,
    SolverBudgetExceededError,
)
from .graphs import Node
from .model import ChannelModel, EntropyOracle, NetworkInstance, derive_seed, generate_network
from .validity import check_generalized_valid, check_pairwise_valid

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_BUDGET = 3


class Status:
    OK = 'ok'
    INFEASIBLE = 'infeasible'
    BUDGET_EXCEEDED = 'budget_exceeded'
    SKIPPED = 'skipped'


# ============================================================================
# Report types
# ============================================================================

class MethodResult(BaseModel):
    method: Method
    status: str = Status.OK
    sum: Optional[float] = None
    r_s0: Optional[float] = None
    rates: List[float] = Field(default_factory=list)
    powers: Optional[List[float]] = None
    feasible: bool = True
    valid: Optional[bool] = None
    exact: bool = True
    seconds: float = 0.0
    witness_edges: List[dict] = Field(default_factory=list)
    schedule: Optional[List[dict]] = None

    @property
    def usable(self) -> bool:
        return self.status == Status.OK and self.feasible


class SolveReport(BaseModel):
    """Every applicable method on one instance, plus the ordering checks between them."""
    mode: Mode
    n: int
    c: float
    seed: int
    peak_power: float
    clamp: bool
    h1: float
    joint_entropy: float
    methods: Dict[str, MethodResult]
    sandwich_violations: List[str] = Field(default_factory=list)

    @property
    def sandwich_ok(self) -> bool:
        return not self.sandwich_violations

    @property
    def infeasible(self) -> bool:
        return self.methods[Method.OPTIMAL.value].status == Status.INFEASIBLE

    @property
    def budget_exceeded(self) -> bool:
        return any(m.status == Status.BUDGET_EXCEEDED for m in self.methods.values())

    @property
    def exit_code(self) -> int:
        if self.budget_exceeded:
            return EXIT_BUDGET
        if self.infeasible:
            return EXIT_INFEASIBLE
        return EXIT_OK

    def sum_of(self, method: Method) -> Optional[float]:
        result = self.methods.get(method.value)
        return result.sum if result is not None and result.usable else None

    def to_json(self, timings: bool = True) -> str:
        exclude = {'methods': {'__all__': {'seconds'}}} if not timings else None
        return self.model_dump_json(indent=2, exclude=exclude)


# ============================================================================
# Witness output
# ============================================================================

def _node_xy(node: Node, instance: NetworkInstance):
    # starred nodes stand for direct delivery, drawn at the sink
    if node.starred:
        return list(instance.sink_position)
    return list(instance.positions[node.index])


def _witness_with_coordinates(assignment: Union[RateAssignment, PowerAssignment],
                              instance: NetworkInstance) -> List[dict]:
    if assignment.witness is None:
        return []
    edges = []
    for e in assignment.witness.edges:
        entry = e.to_dict()
        entry['tail_xy'] = _node_xy(e.tail, instance)
        entry['head_xy'] = _node_xy(e.head, instance)
        edges.append(entry)
    return edges


def witness_to_dot(edges: List[dict], name: str = 'witness') -> str:
    """Graphviz text for witness edges carrying coordinates; undirected edges are drawn without arrows."""
    nodes = {}
    for e in edges:
        nodes[e['tail']] = e['tail_xy']
        nodes[e['head']] = e['head_xy']
    lines = [f'digraph "{name}" {{']
    for label in sorted(nodes):
        x, y = nodes[label]
        shape = 'box' if label.endswith('*') else 'circle'
        lines.append(f'  "{label}" [pos="{x:.6f},{y:.6f}!", shape={shape}];')
    for e in edges:
        attrs = [f'label="{e["weight"]:.4f}"']
        if e['kind'] == 'undirected':
            attrs.append('dir=none')
        lines.append(f'  "{e["tail"]}" -> "{e["head"]}" [{", ".join(attrs)}];')
    lines.append('}')
    return '\n'.join(lines) + '\n'


# ============================================================================
# Solve
# ============================================================================

def _timed(fn: Callable, *args, **kwargs):
    start = time.perf_counter()
    value = fn(*args, **kwargs)
    return value, time.perf_counter() - start


def _rate_result(assignment: RateAssignment, seconds: float, h1: float, instance: NetworkInstance,
                 oracle: EntropyOracle) -> MethodResult:
    result = MethodResult(
        method=assignment.method,
        sum=assignment.sum,
        r_s0=assignment.sum / h1,
        rates=list(assignment.rates),
        exact=assignment.exact,
        seconds=seconds,
        witness_edges=_witness_with_coordinates(assignment, instance),
    )
    verdict = check_pairwise_valid(assignment.rates, oracle)
    if not verdict.valid:
        raise InvalidAllocationError(f"{assignment.method.value} rates failed the pairwise check: {verdict.reason}")
    result.valid = True
    result.schedule = verdict.schedule.to_list()
    return result


def _power_result(assignment: PowerAssignment, seconds: float, instance: NetworkInstance,
                  oracle: EntropyOracle, channel: ChannelModel, check: bool) -> MethodResult:
    result = MethodResult(
        method=assignment.method,
        sum=assignment.sum,
        rates=list(assignment.rates.rates),
        powers=list(assignment.powers),
        feasible=assignment.feasible,
        exact=assignment.exact,
        seconds=seconds,
        witness_edges=_witness_with_coordinates(assignment, instance),
    )
    if check and assignment.feasible:
        verdict = check_generalized_valid(assignment.rates.rates, oracle, channel)
        if not verdict.valid:
            raise InvalidAllocationError(
                f"{assignment.method.value} allocation failed the generalized check: {verdict.reason}"
            )
        result.valid = True
        result.schedule = verdict.schedule.to_list()
    return result


def _sandwich(chain: List[tuple], slack: Callable[[float], float]) -> List[str]:
    """Violations of lower <= upper along consecutive usable entries of (label, value)."""
    present = [(label, value) for label, value in chain if value is not None]
    violations = []
    for (lo_label, lo), (hi_label, hi) in zip(present, present[1:]):
        if lo > hi + slack(hi):
            violations.append(f"{lo_label}={lo:.9g} exceeds {hi_label}={hi:.9g}")
    return violations


def _solve_noiseless(instance: NetworkInstance, oracle: EntropyOracle) -> Dict[str, MethodResult]:
    h1 = oracle.h1
    results = {}
    for fn in (optimal_noiseless_rates, matching_rates_noiseless, individual_baseline):
        assignment, seconds = _timed(fn, oracle)
        results[assignment.method.value] = _rate_result(assignment, seconds, h1, instance, oracle)
    bound, seconds = _timed(sw_n_rate_bound, oracle)
    results[Method.SW_N_ORACLE.value] = MethodResult(
        method=Method.SW_N_ORACLE, sum=bound, r_s0=bound / h1, seconds=seconds
    )
    return results


def _solve_noisy(config: ExperimentConfig, instance: NetworkInstance, oracle: EntropyOracle,
                 channel: ChannelModel) -> Dict[str, MethodResult]:
    results = {}
    try:
        assignment, seconds = _timed(optimal_noisy_allocation, oracle, channel, time_budget=config.budget_secs)
        results[Method.OPTIMAL.value] = _power_result(assignment, seconds, instance, oracle, channel, True)
    except InfeasibleAllocationError as e:
        logger.info(f"n={instance.node_count} seed={instance.seed}: {e}")
        results[Method.OPTIMAL.value] = MethodResult(method=Method.OPTIMAL, status=Status.INFEASIBLE, feasible=False)
    except SolverBudgetExceededError as e:
        logger.warning(f"n={instance.node_count} seed={instance.seed}: {e}")
        results[Method.OPTIMAL.value] = MethodResult(method=Method.OPTIMAL, status=Status.BUDGET_EXCEEDED, exact=False)

    try:
        assignment, seconds = _timed(matching_allocation_noisy, oracle, channel)
        results[Method.MATCHING.value] = _power_result(assignment, seconds, instance, oracle, channel, True)
    except InfeasibleAllocationError as e:
        logger.info(f"n={instance.node_count} seed={instance.seed}: {e}")
        results[Method.MATCHING.value] = MethodResult(method=Method.MATCHING, status=Status.INFEASIBLE, feasible=False)

    assignment, seconds = _timed(individual_baseline, oracle, channel)
    results[Method.INDIVIDUAL.value] = _power_result(assignment, seconds, instance, oracle, channel, True)

    if instance.node_count <= SW_N_LIMIT:
        try:
            assignment, seconds = _timed(sw_n_power_oracle, oracle, channel)
            results[Method.SW_N_ORACLE.value] = _power_result(assignment, seconds, instance, oracle, channel, False)
        except InfeasibleAllocationError as e:
            logger.info(f"n={instance.node_count} seed={instance.seed}: {e}")
            results[Method.SW_N_ORACLE.value] = MethodResult(
                method=Method.SW_N_ORACLE, status=Status.INFEASIBLE, feasible=False
            )
    else:
        results[Method.SW_N_ORACLE.value] = MethodResult(method=Method.SW_N_ORACLE, status=Status.SKIPPED)
    return results


def solve_instance(config: ExperimentConfig, instance: NetworkInstance) -> SolveReport:
    """
    Run every method that applies to the configured mode, re-check each
    assignment for validity and record the ordering between their sums.
    """
    oracle = EntropyOracle.from_instance(instance)
    n = instance.node_count
    joint = oracle.joint_entropy_all()

    if config.mode == Mode.NOISELESS:
        methods = _solve_noiseless(instance, oracle)

        def slack(value: float) -> float:
            return THRESHOLD_SLACK * max(1, n)
    else:
        channel = ChannelModel.from_instance(instance, config.peak_power, config.clamp)
        methods = _solve_noisy(config, instance, oracle, channel)

        def slack(value: float) -> float:
            return SANDWICH_SLACK * max(1.0, abs(value))

    # weakest bound first
    chain = []
    for m in (Method.SW_N_ORACLE, Method.OPTIMAL, Method.MATCHING, Method.INDIVIDUAL):
        result = methods[m.value]
        chain.append((m.value, result.sum if result.usable else None))
    violations = _sandwich(chain, slack)
    for v in violations:
        logger.warning(f"Ordering violated on n={n} c={instance.correlation_param} seed={instance.seed}: {v}")

    return SolveReport(
        mode=config.mode,
        n=n,
        c=instance.correlation_param,
        seed=instance.seed,
        peak_power=config.effective_peak_power,
        clamp=config.clamp,
        h1=oracle.h1,
        joint_entropy=joint,
        methods=methods,
        sandwich_violations=violations,
    )


# ============================================================================
# Sweeps and tables
# ============================================================================

def _cells(config: ExperimentConfig, outer: str) -> List[tuple]:
    reps = range(config.replications)
    if outer == 'n':
        return [(n, c, derive_seed(config.seed, r)) for n in config.n_values for c in config.c_values for r in reps]
    return [(n, c, derive_seed(config.seed, r)) for c in config.c_values for n in config.n_values for r in reps]


def _solve_cell(config: ExperimentConfig, cell: tuple) -> SolveReport:
    n, c, seed = cell
    return solve_instance(config, generate_network(n, c, seed))


def _run_cells(config: ExperimentConfig, cells: List[tuple], desc: str) -> List[SolveReport]:
    """Solve every cell; results come back in cell order for any worker count."""
    configs = [config] * len(cells)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            it = pool.map(_solve_cell, configs, cells)
            return list(tqdm(it, total=len(cells), desc=desc, disable=not config.progress))
    return [
        _solve_cell(cfg, cell)
        for cfg, cell in tqdm(zip(configs, cells), total=len(cells), desc=desc, disable=not config.progress)
    ]


def run_sweep(config: ExperimentConfig) -> pd.DataFrame:
    """
    Normalized sum rates over the (n, c) grid. One row per cell, seed and
    method: optimal, matching, individual and the joint-entropy bound.
    """
    if config.mode != Mode.NOISELESS:
        raise InvalidArgumentError("sweeps run in noiseless mode")
    cells = _cells(config, outer='n')
    logger.info(f"Sweeping {len(cells)} instance(s)")
    reports = _run_cells(config, cells, 'sweep')

    rows = []
    for report in reports:
        for m in (Method.OPTIMAL, Method.MATCHING, Method.INDIVIDUAL, Method.SW_N_ORACLE):
            rows.append({
                'n': report.n,
                'c': report.c,
                'seed': report.seed,
                'method': m.value,
                'r_s0': report.methods[m.value].r_s0,
            })
    df = pd.DataFrame(rows, columns=['n', 'c', 'seed', 'method', 'r_s0'])
    if config.output is not None:
        write_csv(df, config.output)
    return df


def run_table(config: ExperimentConfig) -> pd.DataFrame:
    """
    Average sum powers per (c, n) cell for the strict matching forest, the
    matching baseline and the convex oracle. Infeasible or over-budget
    replications are counted and left out of the averages. Forests returned
    without an optimality proof stay in the averages, are counted under
    `inexact` and flag the cell.
    """
    if config.mode != Mode.NOISY:
        raise InvalidArgumentError("tables run in noisy mode")
    cells = _cells(config, outer='c')
    logger.info(f"Tabulating {len(cells)} instance(s)")
    reports = _run_cells(config, cells, 'table')

    rows = []
    reps = config.replications
    for k in range(0, len(reports), reps):
        group = reports[k:k + reps]
        used = [r for r in group if r.sum_of(Method.OPTIMAL) is not None and r.sum_of(Method.MATCHING) is not None]
        infeasible = sum(1 for r in group if r.infeasible or r.sum_of(Method.MATCHING) is None)
        over_budget = sum(1 for r in group if r.budget_exceeded)
        inexact = sum(1 for r in used if not r.methods[Method.OPTIMAL.value].exact)
        if len(used) < len(group):
            logger.info(f"c={group[0].c} n={group[0].n}: {len(group) - len(used)} of {reps} replication(s) excluded")
        if inexact:
            logger.warning(f"c={group[0].c} n={group[0].n}: {inexact} forest(s) not proven optimal")

        def mean(method: Method) -> float:
            values = [r.sum_of(method) for r in used]
            if not values or any(v is None for v in values):
                return math.nan
            return math.fsum(values) / len(values)

        rows.append({
            'c': group[0].c,
            'n': group[0].n,
            'seed': config.seed,
            'replications': reps,
            'used': len(used),
            'infeasible': infeasible,
            'budget_exceeded': over_budget,
            'inexact': inexact,
            'flagged': len(used) < reps or inexact > 0,
            'smf': mean(Method.OPTIMAL),
            'matching': mean(Method.MATCHING),
            'optimal': mean(Method.SW_N_ORACLE),
        })
    df = pd.DataFrame(rows)
    if config.output is not None:
        write_csv(df, config.output)
    return df


def write_csv(df: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, encoding='utf-8', lineterminator='\n')
    logger.info(f"Wrote {len(df)} row(s) to {path}")
    return path
