#!/usr/bin/env python3
"""
resindex - Resilience index CLI
Main entry point for analysis, tables, sweeps and episode simulation
"""

import click

from .analysis import gramian, index, lemma
from .episode import episode, lq_episode
from .pendula import pendula
from .table import sweep, table
from ..core.version import get_stack_versions, get_version

@click.group()
@click.option('--config', type=click.Path(exists=True), help='Run-defaults file (precision, steps, samples, workers)')
@click.pass_context
def cli(ctx, config):
    """Resilience index of LTI systems under attack and defense"""
    ctx.ensure_object(dict)
    ctx.obj['config'] = config

@cli.command()
def version():
    """Show version information"""
    version_str = get_version()
    click.echo(f"resindex version {version_str}")
    for name, stack_version in get_stack_versions().items():
        click.echo(f"  {name} {stack_version}")

# Add subcommands
cli.add_command(index)
cli.add_command(gramian)
cli.add_command(table)
cli.add_command(sweep)
cli.add_command(episode)
cli.add_command(lq_episode)
cli.add_command(pendula)
cli.add_command(lemma)

if __name__ == '__main__':
    cli()
