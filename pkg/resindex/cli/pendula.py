"""
Pendula CLI command - External interface layer
Emit the coupled-pendula benchmark as a standalone system document
"""

from pathlib import Path
from typing import Optional, Tuple

import click
from pydantic import ValidationError

from ..core.config import ConfigLoader
from ..core.exceptions import ConfigError
from ..core.logger import level_for, setup_logger
from ..core.pendula.pendula_models import PendulaParams, parse_subset
from ..services.pendula.pendula_service import PendulaService
from ..services.system.system_service import SystemService
from .common import command_errors, run_config, write_output


@click.command()
@click.option('--attacker', default="all", help='Attacker pendula: left, middle, right, all or a+b [default: all]')
@click.option('--defender', default="all", help='Defender pendula [default: all]')
@click.option('--params', 'params_file', type=click.Path(exists=True, path_type=Path),
              help='YAML document with mass/length/spring/gravity/damping [default: packaged defaults]')
@click.option('--mass', type=float, help='Pendulum mass in kg')
@click.option('--length', type=float, help='Pendulum length in m')
@click.option('--spring', type=float, help='Spring constant in N/m')
@click.option('--gravity', type=float, help='Gravitational acceleration in m/s^2')
@click.option('--damping', type=(float, float, float), metavar='D1 D2 D3', help='Damping per pendulum in 1/s')
@click.option('-o', '--output', type=click.Path(path_type=Path), help='Save the system document to a file')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose logging')
@click.pass_context
@command_errors
def pendula(ctx, attacker: str, defender: str, params_file: Optional[Path], mass: Optional[float],
            length: Optional[float], spring: Optional[float], gravity: Optional[float],
            damping: Optional[Tuple[float, float, float]], output: Optional[Path], verbose: bool):
    """Write the three coupled pendula as a system document

    The document round-trips exactly: `index` on the saved file matches `index`
    on the builtin selector.

    Examples:

      resindex pendula --attacker left --defender middle -o left-middle.json
      resindex pendula --spring 0 --damping 0.1 0.1 0.1
    """
    setup_logger(level_for(verbose))
    config = run_config(ctx, "pendula", output_path=output)

    loader = ConfigLoader()
    values = loader.load_document(params_file or loader.get_config_path("pendula", "default"))
    overrides = {"mass": mass, "length": length, "spring": spring, "gravity": gravity, "damping": damping}
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        params = PendulaParams(**values)
        attackers, defenders = parse_subset(attacker), parse_subset(defender)
    except (ValidationError, ValueError) as e:
        raise ConfigError(f"Invalid pendula settings: {e}")

    system_service = SystemService()
    lti = PendulaService(params).build(params, attackers, defenders)
    click.echo(f"Characteristic time: {system_service.characteristic_time(lti.a):.6g} s", err=True)

    if config.output_path is None:
        write_output(system_service.dumps_system(lti), None)
    else:
        system_service.save_system(lti, config.output_path)
        click.echo(f"✅ Saved system document to {config.output_path}", err=True)
