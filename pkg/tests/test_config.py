import json
import math

import pytest
from pydantic import ValidationError

from pairwise_coding.config import DEFAULT_SWEEP_N, ExperimentConfig, Mode, load_experiment_config


def test_packaged_defaults():
    sweep = load_experiment_config()
    assert sweep.mode == Mode.NOISELESS
    assert sweep.n_values == DEFAULT_SWEEP_N
    assert sweep.c_values == [1.0, 5.0]
    assert sweep.clamp is False
    assert math.isinf(sweep.effective_peak_power)

    table = load_experiment_config(section='table')
    assert table.mode == Mode.NOISY
    assert table.n_values == [4, 8, 12]
    assert table.c_values == [1.0, 3.0, 5.0]
    assert table.replications == 3
    assert table.clamp is True
    assert table.effective_peak_power == 10.0
    assert table.budget_secs is None


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_experiment_config(tmp_path / 'absent.ini')
    with pytest.raises(FileNotFoundError):
        load_experiment_config(tmp_path / 'absent.json')


def test_missing_section(tmp_path):
    path = tmp_path / 'run.ini'
    path.write_text('[other]\nseed = 1\n')
    with pytest.raises(KeyError):
        load_experiment_config(path)


def test_ini_overrides(tmp_path):
    path = tmp_path / 'run.ini'
    path.write_text('[experiment]\nmode = noisy\nn = 4; 6\nc = 2.5\nseed = 9\nclamp = no\noutput = out/t.csv\n')
    cfg = load_experiment_config(path)
    assert cfg.mode == Mode.NOISY
    assert cfg.n_values == [4, 6]
    assert cfg.c_values == [2.5]
    assert cfg.seed == 9
    assert cfg.clamp is False
    assert cfg.output.name == 't.csv'


def test_json_config(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'mode': 'noisy', 'n_values': [4], 'c_values': [1.0], 'replications': 2}))
    cfg = load_experiment_config(path)
    assert cfg.mode == Mode.NOISY
    assert cfg.replications == 2
    assert cfg.clamp is True


@pytest.mark.parametrize('values', [
    {'n_values': []},
    {'n_values': [1]},
    {'c_values': [0.0]},
    {'replications': 0},
    {'peak_power': 0.0},
    {'seed': -1},
    {'workers': 0},
])
def test_invalid_settings(values):
    with pytest.raises(ValidationError):
        ExperimentConfig(**values)
