"""
Command-line interface for parqlab.
"""

import math
import sys
from pathlib import Path

import click
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from parqlab import __version__
from parqlab.errors import ConfigError, ParqLabError
from parqlab.utils import get_settings, setup_logging

console = Console()

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BOUND_VIOLATION = 2


def _fail(message: str) -> None:
    console.print(f"[bold red]Error: {message}[/bold red]")
    sys.exit(EXIT_ERROR)


def _fmt(value) -> str:
    if isinstance(value, float):
        return "-" if math.isnan(value) else f"{value:.6g}"
    return str(value)


def _parse_seeds(text: str):
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise ConfigError(f"--seeds must be comma-separated integers, got {text!r}") from e
    if not seeds:
        raise ConfigError("--seeds is empty")
    return seeds


@click.group()
@click.version_option(version=__version__, prog_name="parqlab")
@click.option(
    '--log-level',
    default=None,
    help='Log level (default: PARQLAB_LOG_LEVEL or INFO)'
)
def main(log_level):
    """
    parqlab - quantization-aware training with piecewise-affine regularization

    Runs seeded optimization experiments and checks convergence bounds.
    """
    setup_logging(log_level or get_settings().log_level)


@main.command()
@click.option(
    '--config',
    '-c',
    'config_path',
    required=True,
    type=click.Path(path_type=Path),
    help='Experiment config (.json or .yaml)'
)
@click.option(
    '--seeds',
    '-s',
    default=None,
    help='Comma-separated seeds overriding the config'
)
@click.option(
    '--out',
    '-o',
    default=None,
    type=click.Path(path_type=Path),
    help='Output root directory'
)
def run(config_path, seeds, out):
    """Run an experiment and write its traces."""
    try:
        from parqlab.harness import load_config
        from parqlab.harness import run as run_experiment

        config = load_config(config_path)
        if seeds:
            config = config.with_seeds(_parse_seeds(seeds))

        console.print(f"\n[bold cyan]Running {config.name}...[/bold cyan]")
        result = run_experiment(config, out_root=out)

        final = result.summary.iloc[-1]
        table = Table(title=f"{config.name}: step {int(final['step'])}, {int(final['n_seeds'])} seed(s)")
        table.add_column("Metric", style="cyan")
        table.add_column("Mean", style="green")
        table.add_column("Std", style="green")
        for metric in ("train_loss", "eval_metric", "objective_gap", "quantized_fraction", "bound_value"):
            table.add_row(metric, _fmt(float(final[f"{metric}_mean"])), _fmt(float(final[f"{metric}_std"])))
        console.print(table)
        console.print(f"[bold green]✓ Outputs written to {result.out_dir}[/bold green]")

    except (ParqLabError, OSError) as e:
        _fail(str(e))


@main.command('check-bound')
@click.option(
    '--trace',
    '-t',
    'traces',
    multiple=True,
    required=True,
    type=click.Path(path_type=Path),
    help='Per-seed trace CSV (repeat for several seeds)'
)
@click.option('--G', 'G', required=True, type=float, help='Lipschitz constant G')
@click.option('--R', 'R', required=True, type=float, help='Distance bound R')
@click.option(
    '--min-step',
    default=10,
    show_default=True,
    help='First step that can be flagged'
)
@click.option(
    '--column',
    default='objective_gap',
    show_default=True,
    help='Trace column holding the gap'
)
def check_bound(traces, G, R, min_step, column):
    """Check a trace against the last-iterate convergence bound."""
    try:
        from parqlab.harness import check_bound as check

        report = check(list(traces), G=G, R=R, min_step=min_step, column=column)

        table = Table(title=f"Bound check ({report.n_seeds} seed(s), G={G:g}, R={R:g})")
        for name, style in (("Step", "cyan"), ("Gap mean", "green"), ("SEM", "green"), ("Bound", "yellow"), ("Margin", "green")):
            table.add_column(name, style=style)
        for row in report.frame.itertuples(index=False):
            style = "bold red" if row.flagged else None
            table.add_row(
                str(row.step), _fmt(row.gap_mean), _fmt(row.gap_sem), _fmt(row.bound), _fmt(row.margin), style=style
            )
        console.print(table)

        worst = report.worst
        if report.violated:
            console.print(Panel(
                f"{report.n_flagged} step(s) exceed the bound; worst margin {worst['margin']:.6g} at step {int(worst['step'])}",
                title="Violation",
                border_style="red",
            ))
            sys.exit(EXIT_BOUND_VIOLATION)
        console.print(Panel(
            f"Bound holds; smallest margin {worst['margin']:.6g} at step {int(worst['step'])}",
            title="OK",
            border_style="green",
        ))

    except (ParqLabError, OSError) as e:
        _fail(str(e))


@main.command()
@click.option(
    '--configs',
    '-c',
    'config_paths',
    multiple=True,
    type=click.Path(path_type=Path),
    help='Experiment configs to compare'
)
@click.argument('extra_configs', nargs=-1, type=click.Path(path_type=Path))
@click.option(
    '--out',
    '-o',
    required=True,
    type=click.Path(path_type=Path),
    help='Output CSV path'
)
def compare(config_paths, extra_configs, out):
    """Run several methods on one problem and align their metrics."""
    try:
        from parqlab.harness import compare_methods, load_config

        paths = list(config_paths) + list(extra_configs)
        if not paths:
            raise ConfigError("no configs given")
        configs = [load_config(p) for p in paths]

        console.print(f"\n[bold cyan]Comparing {len(configs)} methods...[/bold cyan]")
        result = compare_methods(configs, out)

        table = Table(title="Grid evolution (mean first difference of max |q|)")
        table.add_column("Method", style="cyan")
        for col in ("third_1", "third_2", "third_3"):
            table.add_column(col, style="green")
        table.add_column("Pattern", style="yellow")
        for row in result.grid_summary.itertuples(index=False):
            table.add_row(row.method, _fmt(row.third_1), _fmt(row.third_2), _fmt(row.third_3), row.pattern)
        console.print(table)
        console.print(f"[bold green]✓ Aligned table written to {result.out_path}[/bold green]")

    except (ParqLabError, OSError) as e:
        _fail(str(e))


@main.command()
@click.option(
    '--config',
    '-c',
    'config_path',
    required=True,
    type=click.Path(path_type=Path),
    help='Experiment config (.json or .yaml)'
)
def validate(config_path):
    """Validate a config and show the resolved settings."""
    try:
        from parqlab.harness import load_config

        config = load_config(config_path)

        table = Table(title=f"Experiment {config.name}")
        table.add_column("Setting", style="cyan")
        table.add_column("Value", style="green")
        table.add_row("Problem", config.problem.kind)
        table.add_row("Optimizer", config.optimizer.kind)
        table.add_row("Bits", str(config.optimizer.bits))
        table.add_row("Granularity", config.optimizer.granularity)
        table.add_row("Step schedule", f"{config.step_schedule.kind} (base {config.step_schedule.base:g})")
        table.add_row("Slope schedule", config.slope_schedule.kind)
        table.add_row("Total steps", str(config.total_steps))
        table.add_row("Eval every", str(config.resolved_eval_every))
        table.add_row("Seeds", ",".join(str(s) for s in config.seeds))
        console.print(table)
        console.print("[bold green]✓ Config is valid[/bold green]")

    except ParqLabError as e:
        _fail(str(e))


if __name__ == '__main__':
    main()
