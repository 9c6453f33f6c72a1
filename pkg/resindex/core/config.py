"""
Core configuration utilities for resindex
Handles structured-document loading, run settings, and packaged config lookup
"""

import json
from pathlib import Path
from typing import Any, Dict, Literal, Optional

import yaml
from loguru import logger
from pydantic import BaseModel, Field, ValidationError, field_validator

from .exceptions import ConfigError

PACKAGE_ROOT = Path(__file__).resolve().parent.parent

Command = Literal["index", "sweep", "table", "episode", "lq-episode", "pendula", "gramian", "lemma"]

# Keys a --config run-defaults document may set
RUN_DEFAULT_KEYS = ("precision", "steps", "samples", "workers")


class RunConfig(BaseModel):
    """Settings for one CLI invocation"""
    command: Command = Field(..., description="Subcommand being run")
    system: str = Field(default="pendula:all/all", description="Builtin selector or system document path")
    attack_span: Optional[float] = Field(default=None, description="Attack horizon t1 - t0 (s)")
    defense_span: Optional[float] = Field(default=None, description="Defense horizon t2 - t1 (s)")
    output_path: Optional[Path] = Field(default=None, description="Result document or CSV path")
    output_format: Literal["json", "csv"] = Field(default="json", description="Output format")
    precision: int = Field(default=6, description="Significant digits for printed numbers")
    seed: int = Field(default=0, description="Seed for randomized checks")
    steps: Optional[int] = Field(default=None, ge=1, description="Gramian RK4 step count override")
    samples: int = Field(default=2000, ge=2, description="Trajectory samples per phase")
    workers: int = Field(default=1, ge=1, description="Worker threads for table/sweep cells")

    @field_validator('attack_span', 'defense_span')
    @classmethod
    def validate_span(cls, v):
        """Horizons must be positive when given"""
        if v is not None and not v > 0:
            raise ValueError('horizons must be > 0')
        return v

    @field_validator('precision')
    @classmethod
    def validate_precision(cls, v):
        """Keep printed digits within what a float64 carries"""
        if v < 1 or v > 17:
            raise ValueError('precision must be between 1 and 17 significant digits')
        return v

    @classmethod
    def build(cls, defaults: Optional[Dict[str, Any]] = None, **flags) -> "RunConfig":
        """Merge run defaults with explicit flags (flags win; None means "not given")"""
        merged = dict(defaults or {})
        merged.update({k: v for k, v in flags.items() if v is not None})
        try:
            return cls(**merged)
        except ValidationError as e:
            raise ConfigError(f"Invalid run settings: {e}")


class ConfigLoader:
    """Core utility for structured document loading and parsing"""

    def __init__(self):
        self.logger = logger

    def load_document(self, path: str | Path) -> Dict[str, Any]:
        """Load a JSON (by suffix) or YAML document into a dict"""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Document not found: {path}")
        try:
            text = path.read_text(encoding='utf-8')
        except OSError as e:
            raise ConfigError(f"Failed to read {path}: {e}")
        document = self.parse_document(text, json_format=path.suffix.lower() == '.json', source=str(path))
        self.logger.debug(f"Loaded document from {path}")
        return document

    def parse_document(self, text: str, json_format: bool = False, source: str = "<text>") -> Dict[str, Any]:
        """Parse document text; JSON keeps float repr exact, YAML covers hand-written files"""
        try:
            document = json.loads(text) if json_format else yaml.safe_load(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in {source}: {e}")
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML in {source}: {e}")
        if not isinstance(document, dict):
            raise ConfigError(f"Document {source} must be a mapping at top level")
        return document

    def validate_config_keys(self, config: Dict[str, Any], required_keys: list[str]) -> None:
        """Validate required keys exist in config"""
        missing = [key for key in required_keys if key not in config]
        if missing:
            raise ConfigError(f"Missing required document keys: {missing}")

    def get_config_path(self, config_type: str, config_name: str) -> Path:
        """Get standardized packaged config path"""
        base_path = PACKAGE_ROOT / "configs" / config_type / config_name
        if not base_path.suffix:
            base_path = base_path.with_suffix('.yaml')
        return base_path

    def load_run_defaults(self, path: Optional[str | Path]) -> Dict[str, Any]:
        """Load the root --config document; only run-default keys are kept"""
        if path is None:
            return {}
        document = self.load_document(path)
        unknown = sorted(set(document) - set(RUN_DEFAULT_KEYS))
        if unknown:
            self.logger.warning(f"Ignoring unknown run-default keys: {unknown}")
        return {key: document[key] for key in RUN_DEFAULT_KEYS if key in document}
