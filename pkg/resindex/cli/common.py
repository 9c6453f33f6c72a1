"""
Shared CLI helpers - External interface layer

Run settings, error-to-exit-code mapping, result output and option-set resolution.
"""

import csv
import functools
import io
import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import click
import numpy as np

from ..core.arrays import format_number
from ..core.config import ConfigLoader, RunConfig
from ..core.exceptions import ConfigError, DocumentError, ResindexError
from ..core.system.system_models import LtiSystem
from ..services.pendula.pendula_service import PendulaService
from ..services.system.system_service import PENDULA_PREFIX, SystemService

# Exit code for failures numpy/scipy raise past the services
NUMERICAL_EXIT_CODE = 4


def command_errors(f):
    """Map resindex errors to their exit codes with a one-line stderr message"""
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ResindexError as e:
            click.echo(f"❌ {e}", err=True)
            sys.exit(e.exit_code)
        except (np.linalg.LinAlgError, FloatingPointError) as e:
            click.echo(f"❌ Numerical failure: {e}", err=True)
            sys.exit(NUMERICAL_EXIT_CODE)
    return wrapper


def run_config(ctx: click.Context, command: str, **flags) -> RunConfig:
    """RunConfig from the root --config defaults overlaid with this command's flags"""
    path = (ctx.obj or {}).get('config')
    defaults = ConfigLoader().load_run_defaults(path)
    return RunConfig.build(defaults, command=command, **flags)


def rounded(value: Any, precision: int) -> Any:
    """Round every float in a document to `precision` significant digits"""
    if isinstance(value, dict):
        return {k: rounded(v, precision) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [rounded(v, precision) for v in value]
    if isinstance(value, float) and np.isfinite(value):
        return float(f"{value:.{precision}g}")
    return value


def dumps_document(document: Dict[str, Any], precision: int) -> str:
    return json.dumps(rounded(document, precision), indent=2)


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], precision: int) -> str:
    """CSV with '.' decimals, ',' separator and "inf"/"nan" literals"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else format_number(v, precision) for v in row])
    return buffer.getvalue()


def write_output(content: str, output: Optional[Path]) -> None:
    """Write to the output file when given, otherwise to stdout"""
    if output is None:
        click.echo(content, nl=not content.endswith('\n'))
        return
    output = Path(output)
    os.makedirs(output.parent, exist_ok=True)
    try:
        output.write_text(content, encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"Could not write {output}: {e}")
    click.echo(f"✅ Saved to {output}", err=True)


def parse_names(text: Optional[str]) -> Optional[List[str]]:
    """Comma-separated option names; None passes through"""
    if text is None:
        return None
    names = [name.strip() for name in text.split(",") if name.strip()]
    if not names:
        raise ConfigError(f"No option names in {text!r}")
    return names


def resolve_options(system: str, attackers: Optional[List[str]] = None, defenders: Optional[List[str]] = None
                    ) -> Tuple[np.ndarray, Dict[str, np.ndarray], Dict[str, np.ndarray]]:
    """A and named attacker/defender input maps for table-like commands

    - "pendula": the standard left/middle/right/all set, optionally filtered
    - "pendula:<attacker>/<defender>" or a system document: one option each
    - an options document {"A", "attackers": {name: B}, "defenders": {name: B}}
    """
    system_service = SystemService()
    if system == PENDULA_PREFIX:
        pendula_service = PendulaService()
        attacker_set, defender_set = pendula_service.standard_option_set()
        a = pendula_service.dynamics()
        return a, _select(attacker_set, attackers), _select(defender_set, defenders)

    if system.startswith(PENDULA_PREFIX + ":"):
        selected = system_service.resolve_selector(system)
        attacker, defender = system.split(":", 1)[1].split("/")
        return (selected.a, _select({attacker: selected.b_attack}, attackers),
                _select({defender: selected.b_defend}, defenders))

    document = system_service.config_loader.load_document(system)
    if "attackers" in document or "defenders" in document:
        return _options_document(document, system, attackers, defenders)
    selected = system_service.system_from_document(document, source=system)
    return (selected.a, _select({"Ba": selected.b_attack}, attackers),
            _select({"Bd": selected.b_defend}, defenders))


def _options_document(document: Dict[str, Any], source: str, attackers: Optional[List[str]],
                      defenders: Optional[List[str]]):
    for key in ("A", "attackers", "defenders"):
        if key not in document:
            raise DocumentError(f"{source}: options document needs key '{key}'")
    try:
        a = np.array(document["A"], dtype=float)
        attacker_set = {str(k): np.array(v, dtype=float) for k, v in document["attackers"].items()}
        defender_set = {str(k): np.array(v, dtype=float) for k, v in document["defenders"].items()}
    except (AttributeError, TypeError, ValueError) as e:
        raise DocumentError(f"{source}: invalid options document: {e}")
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.all(np.isfinite(a)):
        raise DocumentError(f"{source}: A must be a finite square matrix, got shape {a.shape}")
    for name, b in {**attacker_set, **defender_set}.items():
        if not np.all(np.isfinite(b)):
            raise DocumentError(f"{source}: option '{name}' has non-finite entries")
    return a, _select(attacker_set, attackers), _select(defender_set, defenders)


def _select(options: Dict[str, np.ndarray], names: Optional[List[str]]) -> Dict[str, np.ndarray]:
    if names is None:
        return options
    missing = [name for name in names if name not in options]
    if missing:
        raise ConfigError(f"Options {missing} not available; have {list(options)}")
    return {name: options[name] for name in names}


def resolve_system(selector: str) -> LtiSystem:
    return SystemService().resolve_selector(selector)
