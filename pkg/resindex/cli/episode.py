"""
Episode CLI commands - External interface layer
Simulated attack/defense episodes with trajectory export
"""

from pathlib import Path
from typing import Optional

import click
import numpy as np

from ..core.exceptions import ConfigError
from ..core.logger import level_for, setup_logger
from ..core.simulate.simulate_models import ScenarioReport
from ..services.simulate.simulate_service import DEFAULT_TARGET_TIME, SimulationService
from ..services.system.system_service import PENDULA_PREFIX
from .common import command_errors, dumps_csv, dumps_document, resolve_system, run_config, write_output

DEFAULT_SPAN = 15.0


@click.command()
@click.option('-s', '--system', default="pendula:all/all", help='Builtin selector or system document')
@click.option('--span', type=float, help='Attack and defense horizon in s (overrides both spans)')
@click.option('--attack-span', type=float, default=DEFAULT_SPAN, help='Attack horizon in s [default: 15]')
@click.option('--defense-span', type=float, default=DEFAULT_SPAN, help='Defense horizon in s [default: 15]')
@click.option('--scale', type=float, default=1.0, help='Attack state = scale * x_worst [default: 1]')
@click.option('--samples', type=int, help='Samples per phase [default: 2000]')
@click.option('--steps', type=int, help='RK4 steps for each Gramian')
@click.option('-t', '--trajectory', type=click.Path(path_type=Path), help='Write the trajectory CSV here')
@click.option('-p', '--precision', type=int, help='Significant digits [default: 6]')
@click.option('-o', '--output', type=click.Path(path_type=Path), help='Save the report to a file')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose logging')
@click.pass_context
@command_errors
def episode(ctx, system: str, span: Optional[float], attack_span: float, defense_span: float,
            scale: float, samples: Optional[int], steps: Optional[int], trajectory: Optional[Path],
            precision: Optional[int], output: Optional[Path], verbose: bool):
    """Minimum-energy attack followed by minimum-energy restoration

    Examples:

      resindex episode --system pendula:all/all --span 15 -t episode.csv
    """
    setup_logger(level_for(verbose))
    if span is not None:
        attack_span = defense_span = span
    config = run_config(
        ctx, "episode", system=system,
        attack_span=attack_span, defense_span=defense_span, samples=samples, steps=steps,
        precision=precision, output_path=output,
    )

    lti = resolve_system(config.system)
    report = SimulationService().run_min_energy_episode(
        lti, x_worst_scale=scale, attack_horizon=config.attack_span, defense_horizon=config.defense_span,
        samples=config.samples, steps=config.steps,
    )
    _emit(report, {"system": config.system}, trajectory, config.precision, config.output_path)


@click.command('lq-episode')
@click.option('-s', '--system', default=PENDULA_PREFIX,
              help='"pendula" (with --attacker/--defender), a selector or a system document [default: pendula]')
@click.option('--attacker', default="all", help='Pendula attacker option [default: all]')
@click.option('--defender', default="left", help='Pendula defender option [default: left]')
@click.option('--attack-span', type=float, default=DEFAULT_SPAN, help='Attack horizon in s [default: 15]')
@click.option('--observe', type=float, default=30.0, help='End of the observation window in s [default: 30]')
@click.option('--target-time', type=float, default=DEFAULT_TARGET_TIME,
              help='Closed-loop characteristic time for R calibration [default: 4.73]')
@click.option('--q-weight', type=float, default=1.0, help='Q = q I [default: 1]')
@click.option('--r-weight', type=float, help='R = r I; skips calibration when given')
@click.option('--scale', type=float, default=1.0, help='Attack state = scale * x_worst [default: 1]')
@click.option('--samples', type=int, help='Samples per phase [default: 2000]')
@click.option('--steps', type=int, help='RK4 steps for each Gramian')
@click.option('-t', '--trajectory', type=click.Path(path_type=Path), help='Write the trajectory CSV here')
@click.option('-p', '--precision', type=int, help='Significant digits [default: 6]')
@click.option('-o', '--output', type=click.Path(path_type=Path), help='Save the report to a file')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose logging')
@click.pass_context
@command_errors
def lq_episode(ctx, system: str, attacker: str, defender: str, attack_span: float, observe: float,
               target_time: float, q_weight: float, r_weight: Optional[float], scale: float,
               samples: Optional[int], steps: Optional[int], trajectory: Optional[Path],
               precision: Optional[int], output: Optional[Path], verbose: bool):
    """Minimum-energy attack against an LQ feedback defender active throughout

    The attack is designed for the closed loop A - B_d K; the reported rho is the
    closed-loop index.

    Examples:

      resindex lq-episode --attacker all --defender left --attack-span 15 --observe 30
    """
    setup_logger(level_for(verbose))
    selector = f"{PENDULA_PREFIX}:{attacker}/{defender}" if system == PENDULA_PREFIX else system
    config = run_config(ctx, "lq-episode", system=selector, attack_span=attack_span,
                        defense_span=observe - attack_span if observe > attack_span else None,
                        samples=samples, steps=steps, precision=precision, output_path=output)
    if not q_weight > 0:
        raise ConfigError("--q-weight must be > 0")

    lti = resolve_system(config.system)
    service = SimulationService()
    q = q_weight * np.eye(lti.n)
    if r_weight is None:
        controller = service.calibrate_lqr(lti, target_time=target_time, q_weight=q)
    else:
        controller = service.design_lqr(lti, q, r_weight * np.eye(lti.m_defend))

    report = service.run_lq_episode(
        lti, controller, attack_horizon=config.attack_span, observe_until=observe,
        samples=config.samples, x_scale=scale, steps=config.steps,
    )
    _emit(report, {"system": config.system, "controller": controller.to_document()}, trajectory,
          config.precision, config.output_path)


def _emit(report: ScenarioReport, extra: dict, trajectory: Optional[Path], precision: int,
          output: Optional[Path]) -> None:
    if trajectory is not None:
        header, rows = SimulationService().export_trajectory_rows(report)
        write_output(dumps_csv(header, rows, precision), trajectory)
    write_output(dumps_document({**extra, **report.to_document()}, precision), output)
