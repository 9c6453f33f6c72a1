"""
Analysis CLI commands - External interface layer
Resilience index, Gramian inspection and the SPD lemma battery
"""

import math
from pathlib import Path
from typing import Optional

import click

from ..core.arrays import format_number
from ..core.exceptions import ConfigError, NumericalError
from ..core.logger import level_for, setup_logger
from ..services.gramian.gramian_service import GramianService
from ..services.resilience.resilience_service import ResilienceService
from ..services.system.system_service import SystemService
from .common import command_errors, dumps_document, resolve_system, run_config, write_output

DEFAULT_SPAN = 15.0


@click.command()
@click.option('-s', '--system', default="pendula:all/all",
              help='pendula[:<attacker>/<defender>] or a system document [default: pendula:all/all]')
@click.option('--attack-span', type=float, default=DEFAULT_SPAN, help='Attack horizon t1 - t0 in s [default: 15]')
@click.option('--defense-span', type=float, default=DEFAULT_SPAN, help='Defense horizon t2 - t1 in s [default: 15]')
@click.option('--steps', type=int, help='RK4 steps for each Gramian [default: max(2000, 200 horizon / T_sys)]')
@click.option('-p', '--precision', type=int, help='Significant digits [default: 6]')
@click.option('-o', '--output', type=click.Path(path_type=Path), help='Save the result document to a file')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose logging')
@click.pass_context
@command_errors
def index(ctx, system: str, attack_span: float, defense_span: float, steps: Optional[int],
          precision: Optional[int], output: Optional[Path], verbose: bool):
    """Compute the resilience index rho and the worst-case attack state

    Examples:

      # Both pendula fully actuated, 15 s + 15 s
      resindex index --system pendula:all/all --attack-span 15 --defense-span 15

      # Own system document
      resindex index --system plant.yaml --attack-span 2 --defense-span 2 -o rho.json
    """
    setup_logger(level_for(verbose))
    config = run_config(ctx, "index", system=system, attack_span=attack_span, defense_span=defense_span,
                        steps=steps, precision=precision, output_path=output)

    lti = resolve_system(config.system)
    result = ResilienceService().resilience_index(lti, config.attack_span, config.defense_span, config.steps)
    document = {"system": config.system, **result.to_document()}

    write_output(dumps_document(document, config.precision), config.output_path)
    if config.output_path is not None:
        click.echo(f"rho = {format_number(result.rho, config.precision)}", err=True)


@click.command()
@click.option('-s', '--system', default="pendula:all/all", help='Builtin selector or system document')
@click.option('--role', type=click.Choice(['attacker', 'defender']), default='defender',
              help='Which input map to use [default: defender]')
@click.option('--horizon', type=float, default=DEFAULT_SPAN, help='Horizon in s, "inf" for the Lyapunov limit')
@click.option('--tilde', is_flag=True, help='Back-propagate the defender Gramian over the horizon')
@click.option('--steps', type=int, help='RK4 step count override')
@click.option('-p', '--precision', type=int, help='Significant digits [default: 6]')
@click.option('-o', '--output', type=click.Path(path_type=Path), help='Save the document to a file')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose logging')
@click.pass_context
@command_errors
def gramian(ctx, system: str, role: str, horizon: float, tilde: bool, steps: Optional[int],
            precision: Optional[int], output: Optional[Path], verbose: bool):
    """Show a controllability Gramian with its spectrum and diagnostics

    Examples:

      resindex gramian --system pendula:all/left --role defender --horizon 15
      resindex gramian --system pendula --role attacker --horizon inf
    """
    setup_logger(level_for(verbose))
    config = run_config(ctx, "gramian", system=system, steps=steps, precision=precision, output_path=output)

    lti = resolve_system(config.system)
    b = lti.b_attack if role == 'attacker' else lti.b_defend
    service = GramianService()
    system_service = SystemService()

    if tilde and (role != "defender" or math.isinf(horizon)):
        raise ConfigError("--tilde needs the defender role and a finite horizon")
    if math.isinf(horizon):
        result = service.gramian_infinite(lti.a, b)
    else:
        result = service.gramian(lti.a, b, horizon, config.steps)
        if tilde:
            result = service.defender_tilde_gramian(lti.a, result, horizon)

    controllability = system_service.controllability(lti.a, b)
    stability = system_service.is_stable(lti.a)
    document = {
        "system": config.system,
        "role": role,
        "tilde": tilde,
        **result.to_document(),
        "controllability": {
            "numerical_rank": controllability.numerical_rank,
            "is_controllable": controllability.is_controllable,
            "rank_tolerance": controllability.rank_tolerance,
        },
        "stability": {
            "is_stable": stability.is_stable,
            "abscissa": stability.abscissa,
            "characteristic_time": "inf" if math.isinf(stability.characteristic_time)
            else stability.characteristic_time,
        },
    }
    write_output(dumps_document(document, config.precision), config.output_path)


@click.command()
@click.option('--seed', type=int, help='Random seed [default: 0]')
@click.option('-n', '--count', type=click.IntRange(1, None), default=100, help='Number of SPD pairs [default: 100]')
@click.option('--max-dim', type=click.IntRange(2, None), default=6, help='Largest matrix size [default: 6]')
@click.option('-p', '--precision', type=int, help='Significant digits [default: 6]')
@click.option('-o', '--output', type=click.Path(path_type=Path), help='Save the report to a file')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose logging')
@click.pass_context
@command_errors
def lemma(ctx, seed: Optional[int], count: int, max_dim: int, precision: Optional[int],
          output: Optional[Path], verbose: bool):
    """Check the SPD Rayleigh-quotient equivalences on seeded random pairs

    Exits with status 4 when any pair disagrees beyond tolerance.

    Examples:

      resindex lemma --seed 7 --count 100
    """
    setup_logger(level_for(verbose))
    config = run_config(ctx, "lemma", seed=seed, precision=precision, output_path=output)

    report = ResilienceService().lemma_suite(seed=config.seed, count=count, max_dim=max_dim)
    write_output(dumps_document(report.to_document(), config.precision), config.output_path)
    if not report.passed:
        raise NumericalError(
            f"Lemma forms disagree: spread {report.max_relative_spread:.3g}, angle {report.max_relation_angle:.3g} rad"
        )
    click.echo(f"✅ {report.count} pairs agree", err=True)
