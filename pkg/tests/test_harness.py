import dataclasses
import json
import math

import pandas as pd
import pytest

from pairwise_coding.allocation import Method, optimal_noisy_allocation
from pairwise_coding.config import ExperimentConfig, Mode
from pairwise_coding.exceptions import InvalidArgumentError
from pairwise_coding.harness import (
    EXIT_INFEASIBLE,
    EXIT_OK,
    Status,
    run_sweep,
    run_table,
    solve_instance,
    witness_to_dot,
)
from pairwise_coding.model import generate_network
from tests.conftest import close_triple


# ============================================================================
# Single instance
# ============================================================================

def test_noiseless_pair_report():
    report = solve_instance(ExperimentConfig(mode=Mode.NOISELESS), generate_network(2, 1.0, 3))
    joint = report.joint_entropy
    assert report.sum_of(Method.OPTIMAL) == pytest.approx(joint)
    assert report.sum_of(Method.MATCHING) == pytest.approx(joint)
    assert report.sum_of(Method.SW_N_ORACLE) == pytest.approx(joint)
    assert report.methods[Method.INDIVIDUAL.value].r_s0 == pytest.approx(2.0)
    assert report.sandwich_ok
    assert report.exit_code == EXIT_OK
    assert math.isinf(report.peak_power)


def test_noiseless_report_carries_schedules():
    report = solve_instance(ExperimentConfig(mode=Mode.NOISELESS), generate_network(6, 1.0, 8))
    optimal = report.methods[Method.OPTIMAL.value]
    assert optimal.valid
    assert len(optimal.schedule) == 6
    assert optimal.schedule[0]['kind'] == 'solo'
    assert report.methods[Method.SW_N_ORACLE.value].schedule is None


@pytest.mark.parametrize('seed', range(3))
def test_noisy_report_is_ordered(seed):
    report = solve_instance(ExperimentConfig(mode=Mode.NOISY), generate_network(6, 1.0, seed))
    assert report.clamp
    assert report.peak_power == 10.0
    assert report.sandwich_ok, report.sandwich_violations
    assert report.exit_code == EXIT_OK
    assert report.methods[Method.SW_N_ORACLE.value].status == Status.OK
    assert report.methods[Method.OPTIMAL.value].valid


def test_tiny_peak_power_is_reported_infeasible():
    report = solve_instance(ExperimentConfig(mode=Mode.NOISY, peak_power=1e-3), close_triple())
    assert report.infeasible
    assert report.exit_code == EXIT_INFEASIBLE
    assert report.methods[Method.MATCHING.value].status == Status.INFEASIBLE
    assert not report.methods[Method.INDIVIDUAL.value].feasible
    assert report.sum_of(Method.INDIVIDUAL) is None
    assert report.sandwich_ok


def test_report_json_without_timings():
    report = solve_instance(ExperimentConfig(mode=Mode.NOISELESS), generate_network(4, 1.0, 1))
    data = json.loads(report.to_json(timings=False))
    assert 'seconds' not in data['methods']['optimal']
    assert data['peak_power'] is None
    assert 'seconds' in json.loads(report.to_json())['methods']['optimal']


# ============================================================================
# Witness output
# ============================================================================

def test_witness_coordinates_and_dot():
    inst = generate_network(4, 1.0, 5)
    report = solve_instance(ExperimentConfig(mode=Mode.NOISELESS), inst)
    edges = report.methods[Method.OPTIMAL.value].witness_edges
    assert len(edges) == 4
    for e in edges:
        if e['tail'].endswith('*'):
            assert e['tail_xy'] == list(inst.sink_position)
        assert e['head_xy'] == list(inst.positions[int(e['head'])])

    dot = witness_to_dot(edges, 'optimal')
    assert dot.startswith('digraph "optimal" {')
    assert dot.count('->') == 4
    assert 'shape=box' in dot


def test_dot_draws_pairs_without_arrows():
    edges = [{'tail': '0', 'head': '1', 'weight': 5.25, 'kind': 'undirected',
              'tail_xy': [0.1, 0.2], 'head_xy': [0.3, 0.4]}]
    dot = witness_to_dot(edges)
    assert '"0" -> "1" [label="5.2500", dir=none];' in dot
    assert '"0" [pos="0.100000,0.200000!", shape=circle];' in dot


# ============================================================================
# Sweeps and tables
# ============================================================================

def test_sweep_rows():
    config = ExperimentConfig(n_values=[4, 6], c_values=[1.0, 5.0], replications=2)
    df = run_sweep(config)
    assert list(df.columns) == ['n', 'c', 'seed', 'method', 'r_s0']
    assert len(df) == 2 * 2 * 2 * 4
    assert list(df['n'])[:16] == [4] * 16
    assert list(df['method'])[:4] == ['optimal', 'matching', 'individual', 'sw_n_oracle']
    individual = df[df['method'] == 'individual']
    assert (individual['r_s0'] - individual['n']).abs().max() < 1e-9
    for _, cell in df.groupby(['n', 'c', 'seed']):
        r = dict(zip(cell['method'], cell['r_s0']))
        assert r['sw_n_oracle'] <= r['optimal'] + 1e-9
        assert r['optimal'] <= r['matching'] + 1e-9


def test_sweep_writes_csv(tmp_path):
    out = tmp_path / 'nested' / 'sweep.csv'
    run_sweep(ExperimentConfig(n_values=[4], c_values=[1.0], output=out))
    lines = out.read_text(encoding='utf-8').splitlines()
    assert lines[0] == 'n,c,seed,method,r_s0'
    assert len(lines) == 5


def test_table_is_deterministic(tmp_path):
    paths = []
    for name in ('a.csv', 'b.csv'):
        config = ExperimentConfig(
            mode=Mode.NOISY, n_values=[4], c_values=[1.0, 3.0], replications=2, output=tmp_path / name
        )
        run_table(config)
        paths.append(tmp_path / name)
    assert paths[0].read_bytes() == paths[1].read_bytes()

    df = pd.read_csv(paths[0])
    assert list(df.columns) == [
        'c', 'n', 'seed', 'replications', 'used', 'infeasible', 'budget_exceeded', 'inexact', 'flagged',
        'smf', 'matching', 'optimal',
    ]
    assert list(df['c']) == [1.0, 3.0]
    assert (df['optimal'] <= df['smf'] * (1 + 1e-5)).all()
    assert (df['smf'] <= df['matching'] + 1e-9).all()
    assert (df['inexact'] == 0).all()
    assert not df['flagged'].any()


def test_unproven_forests_flag_the_table(monkeypatch):
    def unproven(oracle, channel, time_budget=None):
        found = optimal_noisy_allocation(oracle, channel, time_budget=time_budget)
        return dataclasses.replace(found, rates=dataclasses.replace(found.rates, exact=False))

    monkeypatch.setattr('pairwise_coding.harness.optimal_noisy_allocation', unproven)
    df = run_table(ExperimentConfig(mode=Mode.NOISY, n_values=[4], c_values=[1.0], replications=3))
    row = df.iloc[0]
    assert row['used'] == 3
    assert row['inexact'] == 3
    assert bool(row['flagged'])
    assert row['budget_exceeded'] == 0


def test_modes_are_checked():
    with pytest.raises(InvalidArgumentError):
        run_sweep(ExperimentConfig(mode=Mode.NOISY))
    with pytest.raises(InvalidArgumentError):
        run_table(ExperimentConfig(mode=Mode.NOISELESS))


@pytest.mark.slow
def test_worker_count_does_not_change_results():
    base = dict(n_values=[4, 6], c_values=[1.0, 5.0], replications=2)
    serial = run_sweep(ExperimentConfig(**base))
    parallel = run_sweep(ExperimentConfig(workers=2, **base))
    pd.testing.assert_frame_equal(serial, parallel)


# ============================================================================
# Ordering and trends over many instances
# ============================================================================

@pytest.mark.slow
def test_noiseless_ordering_over_many_instances():
    config = ExperimentConfig(mode=Mode.NOISELESS)
    for n in (4, 8, 12, 16, 20):
        for seed in range(20):
            report = solve_instance(config, generate_network(n, (1.0, 5.0)[seed % 2], 500 + seed))
            assert report.sandwich_ok, report.sandwich_violations
            assert report.methods[Method.OPTIMAL.value].valid
            assert report.methods[Method.MATCHING.value].valid


@pytest.mark.slow
def test_noisy_ordering_over_many_instances():
    config = ExperimentConfig(mode=Mode.NOISY)
    for n in (4, 8, 12, 16):
        for seed in range(25):
            report = solve_instance(config, generate_network(n, (1.0, 5.0)[seed % 2], 700 + seed))
            assert report.sandwich_ok, report.sandwich_violations
            optimal = report.methods[Method.OPTIMAL.value]
            assert optimal.usable and optimal.exact and optimal.valid


@pytest.mark.slow
def test_matching_gap_shrinks_with_weaker_correlation():
    df = run_sweep(ExperimentConfig(n_values=[20], c_values=[1.0, 5.0], replications=20))
    means = df.groupby(['c', 'method'])['r_s0'].mean()
    ratio = {c: means[(c, 'matching')] / means[(c, 'optimal')] for c in (1.0, 5.0)}
    assert ratio[1.0] > 1.0
    assert ratio[5.0] > 1.0
    assert ratio[1.0] - 1.0 > ratio[5.0] - 1.0


@pytest.mark.slow
def test_table_gap_shrinks_with_weaker_correlation():
    df = run_table(ExperimentConfig(mode=Mode.NOISY, n_values=[8], c_values=[1.0, 5.0], replications=20))
    assert not df['flagged'].any()
    gap = {row['c']: (row['matching'] - row['smf']) / row['smf'] for _, row in df.iterrows()}
    assert gap[1.0] > gap[5.0] >= 0.0
    assert (df['optimal'] <= df['smf'] * (1 + 1e-5)).all()
