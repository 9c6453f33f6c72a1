"""
Table CLI commands - External interface layer
Attacker/defender placement tables and horizon sweeps
"""

from pathlib import Path
from typing import Optional, Tuple

import click
import numpy as np
from pydantic import ValidationError

from ..core.arrays import encode_scalar
from ..core.exceptions import ConfigError, DocumentError
from ..core.logger import level_for, setup_logger
from ..core.system.system_models import LtiSystem
from ..services.resilience.resilience_service import ResilienceService
from ..services.system.system_service import PENDULA_PREFIX
from .common import command_errors, dumps_csv, dumps_document, parse_names, resolve_options, run_config, write_output

DEFAULT_SPAN = 15.0


@click.command()
@click.option('-s', '--system', default=PENDULA_PREFIX,
              help='"pendula" option set, a selector, a system document or an options document [default: pendula]')
@click.option('--attackers', help='Comma-separated attacker options to keep (rows)')
@click.option('--defenders', help='Comma-separated defender options to keep (columns)')
@click.option('--attack-span', type=float, default=DEFAULT_SPAN, help='Attack horizon in s [default: 15]')
@click.option('--defense-span', type=float, default=DEFAULT_SPAN, help='Defense horizon in s [default: 15]')
@click.option('--steps', type=int, help='RK4 step count override')
@click.option('-w', '--workers', type=int, help='Worker threads for cells [default: 1]')
@click.option('-f', '--format', 'output_format', type=click.Choice(['csv', 'json']), default='csv',
              help='Output format [default: csv]')
@click.option('-p', '--precision', type=int, help='Significant digits [default: 6]')
@click.option('-o', '--output', type=click.Path(path_type=Path), help='Save to file (default: stdout)')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose logging')
@click.pass_context
@command_errors
def table(ctx, system: str, attackers: Optional[str], defenders: Optional[str], attack_span: float,
          defense_span: float, steps: Optional[int], workers: Optional[int], output_format: str,
          precision: Optional[int], output: Optional[Path], verbose: bool):
    """Resilience index for every attacker/defender placement

    Rows are attacker options, columns defender options. Cells that fail are
    written as "nan" and listed on stderr; the table is still produced.

    Examples:

      # Full left/middle/right/all benchmark table
      resindex table

      # Only two defender placements, as JSON with best/worst picks
      resindex table --defenders middle,all -f json
    """
    setup_logger(level_for(verbose))
    config = run_config(ctx, "table", system=system, attack_span=attack_span, defense_span=defense_span,
                        steps=steps, workers=workers, output_format=output_format, precision=precision,
                        output_path=output)

    a, attacker_options, defender_options = resolve_options(config.system, parse_names(attackers),
                                                            parse_names(defenders))
    result = ResilienceService().placement_table(
        a, attacker_options, defender_options, config.attack_span, config.defense_span,
        steps=config.steps, workers=config.workers,
    )

    for cell in result.failures():
        click.echo(f"⚠️  {cell.attacker}/{cell.defender}: {cell.status.value}: {cell.message}", err=True)

    if config.output_format == 'csv':
        values = result.matrix()
        rows = [[attacker, *values[i]] for i, attacker in enumerate(result.attackers)]
        content = dumps_csv(["attacker", *result.defenders], rows, config.precision)
    else:
        document = {
            "attackers": result.attackers,
            "defenders": result.defenders,
            "rho": [[encode_scalar(v) for v in row] for row in result.matrix()],
            "best_defender": result.best_defender(),
            "worst_attacker": result.worst_attacker(),
            "failures": [
                {"attacker": c.attacker, "defender": c.defender, "status": c.status.value, "message": c.message}
                for c in result.failures()
            ],
            "horizons": {"attack": result.attack_horizon, "defense": result.defense_horizon},
        }
        content = dumps_document(document, config.precision)
    write_output(content, config.output_path)


@click.command()
@click.option('-s', '--system', default=PENDULA_PREFIX,
              help='"pendula" option set, a system document or an options document [default: pendula]')
@click.option('--attacker', help='Attacker option ("Ba" for a system document) [default: all for pendula]')
@click.option('--defenders', help='Comma-separated defender options, one column each [default: every option]')
@click.option('--dt', 'dts', type=float, multiple=True, help='Horizon dt in s (repeatable)')
@click.option('--log-range', type=(int, float, float), metavar='COUNT MIN MAX',
              help='COUNT log-spaced horizons between MIN and MAX s')
@click.option('--steps', type=int, help='RK4 step count override')
@click.option('-w', '--workers', type=int, help='Worker threads [default: 1]')
@click.option('-p', '--precision', type=int, help='Significant digits [default: 6]')
@click.option('-o', '--output', type=click.Path(path_type=Path), help='Save CSV to file (default: stdout)')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose logging')
@click.pass_context
@command_errors
def sweep(ctx, system: str, attacker: Optional[str], defenders: Optional[str], dts: Tuple[float, ...],
          log_range: Optional[Tuple[int, float, float]], steps: Optional[int], workers: Optional[int],
          precision: Optional[int], output: Optional[Path], verbose: bool):
    """rho(0, dt, 2 dt) over horizons, one column per defender option

    Examples:

      # 25 log-spaced horizons from 1.5 s to 150 s
      resindex sweep --log-range 25 1.5 150

      # A few horizons for two defenders
      resindex sweep --dt 7.5 --dt 15 --dt 30 --defenders left,all
    """
    setup_logger(level_for(verbose))
    config = run_config(ctx, "sweep", system=system, steps=steps, workers=workers, precision=precision,
                        output_path=output)
    horizons = _horizons(dts, log_range)

    if attacker is None and config.system == PENDULA_PREFIX:
        attacker = "all"
    a, attacker_options, defender_options = resolve_options(
        config.system, [attacker] if attacker else None, parse_names(defenders)
    )
    if len(attacker_options) != 1:
        raise ConfigError(f"sweep needs one attacker option, have {list(attacker_options)}; pass --attacker")
    (b_attack,) = attacker_options.values()

    service = ResilienceService()
    columns = []
    for name, b_defend in defender_options.items():
        try:
            lti = LtiSystem(a=a, b_attack=b_attack, b_defend=b_defend)
        except ValidationError as e:
            raise DocumentError(f"Invalid system for defender '{name}': {e}")
        points = service.sweep(lti, horizons, config.steps, config.workers)
        columns.append([point.result.rho for point in points])

    rows = [[dt, *values] for dt, values in zip(horizons, zip(*columns))]
    write_output(dumps_csv(["dt", *defender_options], rows, config.precision), config.output_path)


def _horizons(dts: Tuple[float, ...], log_range: Optional[Tuple[int, float, float]]) -> list:
    if dts and log_range:
        raise ConfigError("Use either --dt or --log-range, not both")
    if dts:
        return sorted(dts)
    if log_range:
        count, low, high = log_range
        if count < 1 or not 0 < low <= high:
            raise ConfigError("--log-range needs COUNT >= 1 and 0 < MIN <= MAX")
        return np.geomspace(low, high, count).tolist()
    raise ConfigError("Give horizons with --dt or --log-range")
