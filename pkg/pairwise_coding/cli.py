"""
Command line entry point.

    python -m pairwise_coding gen --n 20 --c 1 --seed 7 --out instance.json
    python -m pairwise_coding solve --instance instance.json --mode noisy --pmax 10
    python -m pairwise_coding sweep --out sweep.csv
    python -m pairwise_coding table --reps 3 --out table.csv
    python -m pairwise_coding oracle --n 6 --c 1 --mode noisy

Exit codes: 0 success, 1 invalid input, 2 infeasible, 3 solver budget exceeded.
"""

import json
import logging
import math
from pathlib import Path
from typing import List, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from .allocation import sw_n_power_oracle
from .config import CSV_FLOAT_FORMAT, DEFAULT_CONFIG_PATH, ExperimentConfig, Mode, load_experiment_config
from .exceptions import InfeasibleAllocationError, PairwiseCodingError
from .harness import EXIT_INFEASIBLE, EXIT_INVALID, run_sweep, run_table, solve_instance, witness_to_dot
from .model import ChannelModel, EntropyOracle, NetworkInstance, generate_network, generator_description

logger = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, help="Pairwise distributed source coding allocator.")


@app.callback()
def main(verbose: bool = typer.Option(False, '--verbose', '-v', help="Log at DEBUG level.")):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(message)s',
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
    )


# ============================================================================
# Helpers
# ============================================================================

def _fail(message: str, code: int = EXIT_INVALID):
    logger.error(message)
    raise typer.Exit(code=code)


def _build_config(config_path: Optional[Path], section: str, **overrides) -> ExperimentConfig:
    """Config file values (packaged defaults when no file is given), then any flag that was set."""
    try:
        base = load_experiment_config(config_path or DEFAULT_CONFIG_PATH, section=section)
        values = base.model_dump()
        values.update({k: v for k, v in overrides.items() if v not in (None, [], ())})
        return ExperimentConfig(**values)
    except (FileNotFoundError, KeyError, ValidationError) as e:
        _fail(f"Invalid configuration: {e}")


def _load_instance(instance_path: Optional[Path], n: Optional[int], c: Optional[float], seed: int) -> NetworkInstance:
    try:
        if instance_path is not None:
            return NetworkInstance.from_json(instance_path.read_text(encoding='utf-8'))
        if n is None or c is None:
            _fail("Either --instance or both --n and --c are required")
        return generate_network(n, c, seed)
    except (OSError, ValidationError, PairwiseCodingError) as e:
        _fail(f"Cannot build instance: {e}")


def _write_or_echo(text: str, out: Optional[Path]):
    if out is None:
        typer.echo(text, nl=False)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding='utf-8')
    logger.info(f"Wrote {out}")


# ============================================================================
# Commands
# ============================================================================

@app.command()
def gen(
    n: int = typer.Option(..., '--n', help="Number of sensors."),
    c: float = typer.Option(..., '--c', help="Correlation parameter."),
    seed: int = typer.Option(0, '--seed'),
    out: Optional[Path] = typer.Option(None, '--out', help="Instance JSON path (stdout if omitted)."),
):
    """Generate a seeded sensor-field instance."""
    instance = _load_instance(None, n, c, seed)
    logger.info(f"Generated n={n} c={c} seed={seed} with {generator_description()}")
    _write_or_echo(instance.to_json(indent=2) + '\n', out)


@app.command()
def solve(
    instance_path: Optional[Path] = typer.Option(None, '--instance', help="Instance JSON from `gen`."),
    n: Optional[int] = typer.Option(None, '--n'),
    c: Optional[float] = typer.Option(None, '--c'),
    seed: int = typer.Option(0, '--seed'),
    mode: Optional[Mode] = typer.Option(None, '--mode'),
    pmax: Optional[float] = typer.Option(None, '--pmax', help="Peak power per node (noisy mode)."),
    clamp: Optional[bool] = typer.Option(None, '--clamp/--no-clamp', help="Floor negative rates at zero."),
    budget_secs: Optional[float] = typer.Option(None, '--budget-secs', help="Matching forest search budget."),
    config_path: Optional[Path] = typer.Option(None, '--config'),
    out: Optional[Path] = typer.Option(None, '--out', help="Report JSON path (stdout if omitted)."),
    emit_dot: Optional[Path] = typer.Option(None, '--emit-dot', help="Directory for witness graphs in DOT format."),
    timings: bool = typer.Option(True, '--timings/--no-timings', help="Include wall-clock seconds per method."),
):
    """Run every method on one instance and print the report."""
    config = _build_config(
        config_path, 'experiment',
        mode=mode, peak_power=pmax, clamp_rates_at_zero=clamp, budget_secs=budget_secs,
    )
    instance = _load_instance(instance_path, n, c, seed)
    try:
        report = solve_instance(config, instance)
    except PairwiseCodingError as e:
        _fail(f"Solve failed: {e}")

    _write_or_echo(report.to_json(timings=timings) + '\n', out)
    if emit_dot is not None:
        emit_dot.mkdir(parents=True, exist_ok=True)
        for name, result in report.methods.items():
            if result.witness_edges:
                path = emit_dot / f"{name}.dot"
                path.write_text(witness_to_dot(result.witness_edges, name), encoding='utf-8')
                logger.info(f"Wrote {path}")
    if report.exit_code:
        raise typer.Exit(code=report.exit_code)


@app.command()
def sweep(
    n: Optional[List[int]] = typer.Option(None, '--n', help="Sensor counts (repeatable)."),
    c: Optional[List[float]] = typer.Option(None, '--c', help="Correlation parameters (repeatable)."),
    seed: Optional[int] = typer.Option(None, '--seed'),
    reps: Optional[int] = typer.Option(None, '--reps'),
    workers: Optional[int] = typer.Option(None, '--workers'),
    progress: Optional[bool] = typer.Option(None, '--progress/--no-progress'),
    config_path: Optional[Path] = typer.Option(None, '--config'),
    out: Optional[Path] = typer.Option(None, '--out', help="CSV path (stdout if omitted)."),
):
    """Normalized sum rates over an (n, c) grid, noiseless channels."""
    config = _build_config(
        config_path, 'experiment',
        mode=Mode.NOISELESS, n_values=n, c_values=c, seed=seed, replications=reps,
        workers=workers, progress=progress, output=out,
    )
    try:
        df = run_sweep(config)
    except PairwiseCodingError as e:
        _fail(f"Sweep failed: {e}")
    if config.output is None:
        typer.echo(df.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n'), nl=False)


@app.command()
def table(
    n: Optional[List[int]] = typer.Option(None, '--n', help="Sensor counts (repeatable)."),
    c: Optional[List[float]] = typer.Option(None, '--c', help="Correlation parameters (repeatable)."),
    seed: Optional[int] = typer.Option(None, '--seed'),
    reps: Optional[int] = typer.Option(None, '--reps'),
    pmax: Optional[float] = typer.Option(None, '--pmax'),
    clamp: Optional[bool] = typer.Option(None, '--clamp/--no-clamp'),
    budget_secs: Optional[float] = typer.Option(None, '--budget-secs'),
    workers: Optional[int] = typer.Option(None, '--workers'),
    progress: Optional[bool] = typer.Option(None, '--progress/--no-progress'),
    config_path: Optional[Path] = typer.Option(None, '--config'),
    out: Optional[Path] = typer.Option(None, '--out', help="CSV path (stdout if omitted)."),
):
    """Average sum powers: strict matching forest vs matching vs convex oracle."""
    config = _build_config(
        config_path, 'table',
        mode=Mode.NOISY, n_values=n, c_values=c, seed=seed, replications=reps, peak_power=pmax,
        clamp_rates_at_zero=clamp, budget_secs=budget_secs, workers=workers, progress=progress, output=out,
    )
    try:
        df = run_table(config)
    except PairwiseCodingError as e:
        _fail(f"Table failed: {e}")
    if config.output is None:
        typer.echo(df.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n'), nl=False)
    if int(df['infeasible'].sum()):
        logger.warning(f"{int(df['infeasible'].sum())} replication(s) were infeasible")


@app.command()
def oracle(
    instance_path: Optional[Path] = typer.Option(None, '--instance'),
    n: Optional[int] = typer.Option(None, '--n'),
    c: Optional[float] = typer.Option(None, '--c'),
    seed: int = typer.Option(0, '--seed'),
    mode: Mode = typer.Option(Mode.NOISELESS, '--mode'),
    pmax: Optional[float] = typer.Option(None, '--pmax'),
    clamp: Optional[bool] = typer.Option(None, '--clamp/--no-clamp'),
    out: Optional[Path] = typer.Option(None, '--out'),
):
    """Lower bound over the full Slepian-Wolf region: joint entropy, or the convex power program."""
    instance = _load_instance(instance_path, n, c, seed)
    entropies = EntropyOracle.from_instance(instance)
    if mode == Mode.NOISELESS:
        joint = entropies.joint_entropy_all()
        data = {'mode': mode.value, 'joint_entropy': joint, 'r_s0': joint / entropies.h1}
    else:
        config = _build_config(None, 'table', mode=mode, peak_power=pmax, clamp_rates_at_zero=clamp)
        channel = ChannelModel.from_instance(instance, config.peak_power, config.clamp)
        try:
            data = sw_n_power_oracle(entropies, channel).to_dict()
        except InfeasibleAllocationError as e:
            _fail(str(e), EXIT_INFEASIBLE)
        except PairwiseCodingError as e:
            _fail(str(e))
        data['mode'] = mode.value
        data['peak_power'] = channel.peak_power if math.isfinite(channel.peak_power) else None
    _write_or_echo(json.dumps(data, indent=2) + '\n', out)
