"""Command-line interface: run sweeps, summarize results, self-test kernels.

Exit codes: 0 on success, 1 on validation errors, 2 when --strict is set and
any solve failed to converge. The default worker count comes from the
MILACSIM_THREADS environment variable and is overridden by --threads.
"""
from __future__ import annotations

import os
import sys
from dataclasses import replace

import click

from . import experiments
from .exceptions import ConfigError
from .selftest import run_selftest

THREADS_ENV = "MILACSIM_THREADS"


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@click.group()
def main():
    """Analog-network beamforming simulations."""


@main.command(name="run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.option("--plots", is_flag=True, help="Also emit SVG mean-rate curves.")
@click.option("--threads", default=None, type=int, help="Worker processes (overrides env).")
@click.option("--seed", default=None, type=int, help="Override the config seed.")
@click.option("--strict", is_flag=True, help="Exit 2 if any solve failed to converge.")
@click.option("--no-timing", is_flag=True, help="Zero wall_time_ms for byte-reproducible CSVs.")
def run_command(config_path, out_path, plots, threads, seed, strict, no_timing):
    """Run the Monte-Carlo sweep described by a config file."""
    try:
        config = experiments.load_config(config_path)
        if seed is not None:
            config = replace(config, seed=seed)
        out_path = out_path or config.out or "sweep.csv"
        threads = threads if threads is not None else _default_threads()
        records = experiments.run_sweep(config, threads=threads, timing=not no_timing)
        experiments.emit_csv(records, out_path)
        if config.export_channels:
            experiments.export_channel_csv(config, out_path + ".channels.csv")
        if plots:
            for path in experiments.write_plots(records, os.path.splitext(out_path)[0]):
                click.echo(f"wrote {path}")
        click.echo(f"wrote {len(records)} records to {out_path}")
        click.echo(experiments.format_summary(experiments.summarize(records)))
    except (ConfigError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if strict and any(not r.converged for r in records):
        click.echo("strict mode: at least one solve did not converge", err=True)
        sys.exit(2)


@main.command(name="summarize")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
def summarize_command(in_path):
    """Print per-grid-point means, standard errors, and scheme ratios."""
    try:
        records = experiments.parse_csv(in_path)
        click.echo(experiments.format_summary(experiments.summarize(records)))
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@main.command(name="selftest")
def selftest_command():
    """Run the numerical-kernel invariant suite."""
    if not run_selftest(echo=click.echo):
        sys.exit(1)


if __name__ == "__main__":
    main()
