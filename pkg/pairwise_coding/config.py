"""
Configuration for the pairwise source coding allocator
"""

import configparser
import json
import math
from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

# Numerical tolerances
THRESHOLD_SLACK = 1e-9      # bits, inclusive rate threshold tests
POWER_SLACK = 1e-9          # peak power comparisons
SANDWICH_SLACK = 1e-6       # ordering checks between methods

# Source and channel model
DEFAULT_VARIANCE = 1.0
DEFAULT_SINK = (0.0, 0.0)
DEFAULT_PEAK_POWER = 10.0

# Deterministic instance generation
GENERATOR_NAME = 'numpy.random.PCG64'
GENERATOR_VERSION = 1
SEED_MASK = (1 << 64) - 1

# Solver limits
EXACT_SMF_LIMIT = 16
DEFAULT_SMF_BUDGET_SECS = 60.0
DP_MATCHING_LIMIT = 20
BRUTE_FORCE_LIMIT = 7
BRUTE_FORCE_MATCHING_LIMIT = 10
SW_N_LIMIT = 12

# Matching forest branch-and-bound (Lagrangian bound on pair coupling)
SMF_ROOT_ITERATIONS = 60
SMF_CHILD_ITERATIONS = 12
SMF_STEP_SCALE = 2.0
SMF_STALL_LIMIT = 4
SMF_PRUNE_TOL = 1e-9

# Experiment grids
DEFAULT_SWEEP_N = [4, 8, 12, 16, 20, 24, 28, 32, 36, 40]
DEFAULT_SWEEP_C = [1.0, 5.0]
DEFAULT_TABLE_N = [4, 8, 12]
DEFAULT_TABLE_C = [1.0, 3.0, 5.0]

# Output
CSV_FLOAT_FORMAT = '%.9g'
DEFAULT_CONFIG_PATH = Path(__file__).with_name('config.ini')


class Mode(str, Enum):
    NOISELESS = 'noiseless'
    NOISY = 'noisy'


class ExperimentConfig(BaseModel):
    """Validated settings shared by the CLI subcommands."""
    mode: Mode = Mode.NOISELESS
    n_values: List[int] = Field(default_factory=lambda: list(DEFAULT_SWEEP_N), min_length=1)
    c_values: List[float] = Field(default_factory=lambda: list(DEFAULT_SWEEP_C), min_length=1)
    peak_power: float = Field(default=DEFAULT_PEAK_POWER, gt=0)
    seed: int = Field(default=0, ge=0, le=SEED_MASK)
    replications: int = Field(default=1, ge=1)
    clamp_rates_at_zero: Optional[bool] = None
    output: Optional[Path] = None
    budget_secs: Optional[float] = Field(default=None, gt=0)
    workers: int = Field(default=1, ge=1)
    progress: bool = False

    @field_validator('n_values')
    @classmethod
    def _check_n(cls, values: List[int]) -> List[int]:
        if any(n < 2 for n in values):
            raise ValueError("every n must be at least 2")
        return values

    @field_validator('c_values')
    @classmethod
    def _check_c(cls, values: List[float]) -> List[float]:
        if any(not c > 0 for c in values):
            raise ValueError("every c must be positive")
        return values

    @property
    def clamp(self) -> bool:
        # Noisy pipeline defaults to physical powers, noiseless to raw rates.
        if self.clamp_rates_at_zero is None:
            return self.mode == Mode.NOISY
        return self.clamp_rates_at_zero

    @property
    def effective_peak_power(self) -> float:
        return self.peak_power if self.mode == Mode.NOISY else math.inf


def _split_list(raw: str, cast) -> list:
    return [cast(item) for item in raw.replace(';', ',').split(',') if item.strip()]


def load_experiment_config(config_path=DEFAULT_CONFIG_PATH, section: str = 'experiment') -> ExperimentConfig:
    """
    Load experiment settings from an INI file (or a JSON file).
    Raises FileNotFoundError if the file is missing, KeyError if the section is.
    """
    path = Path(config_path)
    if path.suffix.lower() == '.json':
        if not path.exists():
            raise FileNotFoundError(f"Config file '{path}' not found.")
        with open(path, 'r', encoding='utf-8') as f:
            return ExperimentConfig(**json.load(f))

    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise FileNotFoundError(f"Config file '{path}' not found.")

    if section not in cp:
        raise KeyError(f"Section '{section}' not found in config file.")

    exp = cp[section]
    values = {}
    if 'mode' in exp:
        values['mode'] = exp.get('mode')
    if 'n' in exp:
        values['n_values'] = _split_list(exp.get('n'), int)
    if 'c' in exp:
        values['c_values'] = _split_list(exp.get('c'), float)
    if 'pmax' in exp:
        values['peak_power'] = exp.getfloat('pmax')
    if 'seed' in exp:
        values['seed'] = exp.getint('seed')
    if 'replications' in exp:
        values['replications'] = exp.getint('replications')
    if 'clamp' in exp:
        values['clamp_rates_at_zero'] = exp.getboolean('clamp')
    if exp.get('output'):
        values['output'] = exp.get('output')
    if exp.get('budget_secs'):
        values['budget_secs'] = exp.getfloat('budget_secs')
    if 'workers' in exp:
        values['workers'] = exp.getint('workers')

    return ExperimentConfig(**values)
