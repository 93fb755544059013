"""Minimum sum-rate and sum-power allocation for correlated sensor sources under pairwise decoding."""

from .allocation import (
    Method,
    PairOptimum,
    PowerAssignment,
    RateAssignment,
    individual_baseline,
    matching_allocation_noisy,
    matching_rates_noiseless,
    optimal_noiseless_rates,
    optimal_noisy_allocation,
    per_pair_power_optimum,
    sw_n_power_oracle,
)
from .config import ExperimentConfig, Mode, load_experiment_config
from .model import ChannelModel, EntropyOracle, NetworkInstance, generate_network
from .validity import check_generalized_valid, check_pairwise_valid, simulate_decode

__all__ = [
    'ChannelModel',
    'EntropyOracle',
    'ExperimentConfig',
    'Method',
    'Mode',
    'NetworkInstance',
    'PairOptimum',
    'PowerAssignment',
    'RateAssignment',
    'check_generalized_valid',
    'check_pairwise_valid',
    'generate_network',
    'individual_baseline',
    'load_experiment_config',
    'matching_allocation_noisy',
    'matching_rates_noiseless',
    'optimal_noiseless_rates',
    'optimal_noisy_allocation',
    'per_pair_power_optimum',
    'simulate_decode',
    'sw_n_power_oracle',
]
