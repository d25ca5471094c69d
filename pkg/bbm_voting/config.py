"""
Experiment configuration.

Settings come from three layers: built-in defaults, an optional JSON config
file, and command-line flags, with later layers winning. Sections ``solver``
and ``front`` hold the PDE settings; everything else is flat.
"""

import json
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from bbm_voting import settings
from bbm_voting.datums import InitialDatum, parse_datum
from bbm_voting.errors import BBMVotingError, ConfigError, ValidationError
from bbm_voting.pde import FrontConfig, Grid1D, SolverConfig

Representation = Literal['outcome', 'threshold', 'recursive', 'mckean_product']

# settings that do not change any computed number stay out of output headers
HEADER_EXCLUDED = ('workers', 'output', 'summary', 'config')


def parse_x_grid(spec: str) -> np.ndarray:
    """"min:max:count", a single number, or a comma-separated list."""
    text = str(spec).strip()
    try:
        if ':' in text:
            parts = text.split(':')
            if len(parts) != 3:
                raise ValidationError(f"x-grid {spec!r} must look like min:max:count")
            low, high, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValidationError(f"x-grid {spec!r} needs count >= 1")
            if count > 1 and not low < high:
                raise ValidationError(f"x-grid {spec!r} needs min < max")
            return np.linspace(low, high, count) if count > 1 else np.array([low])
        return np.array([float(v) for v in text.split(',')])
    except ValueError as e:
        raise ValidationError(f"bad x-grid {spec!r}: {e}") from e


def parse_window(spec: Any) -> Tuple[float, float]:
    if isinstance(spec, str):
        parts = spec.split(':')
        if len(parts) != 2:
            raise ValidationError(f"window {spec!r} must look like start:end")
        spec = (float(parts[0]), float(parts[1]))
    start, end = (float(v) for v in spec)
    if not start < end:
        raise ValidationError(f"window needs start < end, got ({start}, {end})")
    return start, end


class SolverSection(BaseModel):
    model_config = ConfigDict(extra='forbid')

    dx: float = Field(default=0.02, gt=0)
    x_min: float = -12.0
    x_max: float = 12.0
    dt: Optional[float] = Field(default=None, gt=0)
    snapshot_every: float = Field(default=0.0, ge=0)

    @model_validator(mode='after')
    def _ordered(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min must be below x_max, got [{self.x_min}, {self.x_max}]")
        return self

    def grid(self) -> Grid1D:
        return Grid1D.with_spacing(self.x_min, self.x_max, self.dx)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(dt=self.dt, snapshot_every=self.snapshot_every)


class FrontSection(BaseModel):
    model_config = ConfigDict(extra='forbid')

    t_end: float = Field(default=200.0, gt=0)
    dx: float = Field(default=0.1, gt=0)
    half_width: float = Field(default=40.0, gt=0)
    window: Tuple[float, float] = (20.0, 200.0)
    level: float = Field(default=0.5, gt=0, lt=1)
    fit: Literal['pulled', 'pushed', 'both'] = 'both'
    correction: bool = False

    @field_validator('window', mode='before')
    @classmethod
    def _window(cls, value):
        try:
            return parse_window(value)
        except ValidationError as e:
            raise ValueError(str(e)) from e

    def front_config(self) -> FrontConfig:
        return FrontConfig(dx=self.dx, half_width=self.half_width, level=self.level)


class ExperimentConfig(BaseModel):
    """Everything a subcommand needs; unused fields are ignored by that subcommand."""

    model_config = ConfigDict(extra='forbid')

    f: Optional[str] = None
    model: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    representation: Representation = 'outcome'
    rate: Optional[float] = Field(default=None, gt=0)
    arity: Optional[int] = Field(default=None, ge=2)
    datum: str = 'step'
    t: float = Field(default=1.0, ge=0)
    x: str = '0'
    n: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    mode: Optional[str] = None
    ci: Literal['normal', 'wilson'] = 'normal'
    workers: int = Field(default_factory=settings.default_workers, ge=1)
    tolerance: float = Field(default=2e-3, ge=0)
    solver: SolverSection = Field(default_factory=SolverSection)
    front: FrontSection = Field(default_factory=FrontSection)
    output: Optional[str] = None
    summary: Optional[str] = None

    @field_validator('x')
    @classmethod
    def _x_grid(cls, value: str) -> str:
        try:
            parse_x_grid(value)
        except ValidationError as e:
            raise ValueError(str(e)) from e
        return value

    @field_validator('datum')
    @classmethod
    def _datum(cls, value: str) -> str:
        try:
            parse_datum(value)
        except BBMVotingError as e:
            raise ValueError(str(e)) from e
        return value

    @field_validator('mode')
    @classmethod
    def _mode(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in ('conditional', 'sampled', 'direct', 'via_outcome'):
            raise ValueError("mode must be one of conditional, sampled, direct, via_outcome")
        return value

    def x_values(self) -> np.ndarray:
        return parse_x_grid(self.x)

    def initial_datum(self) -> InitialDatum:
        return parse_datum(self.datum)

    def header_items(self) -> Dict[str, Any]:
        """Flattened resolved settings for output headers."""
        flat: Dict[str, Any] = {}
        for key, value in self.model_dump(exclude=set(HEADER_EXCLUDED)).items():
            if isinstance(value, dict) and key in ('solver', 'front'):
                for sub, sub_value in value.items():
                    flat[f"{key}.{sub}"] = sub_value
            else:
                flat[key] = value
        return flat


def _set_dotted(data: Dict[str, Any], key: str, value: Any) -> None:
    head, _, rest = key.partition('.')
    if rest:
        section = data.setdefault(head, {})
        if not isinstance(section, dict):
            raise ConfigError(f"{head} must be a section", location=head)
        _set_dotted(section, rest, value)
    else:
        data[head] = value


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Merge defaults < config file < flag overrides and validate the result.

    Args:
        path: Optional JSON config file.
        overrides: Flag values keyed by field name ("solver.dx" for sections);
            ``None`` values mean "not given" and are skipped.

    Returns:
        The validated ExperimentConfig.

    Raises:
        ConfigError: with ``file:line:col`` for JSON syntax errors and
            ``file:field`` (or ``--flag``) for invalid values.
    """
    data: Dict[str, Any] = {}
    source = '<defaults>'
    if path:
        source = str(path)
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e.strerror}", location=source) from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(e.msg, location=f"{source}:{e.lineno}:{e.colno}") from e
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object", location=source)

    given = {k: v for k, v in (overrides or {}).items() if v is not None}
    for key, value in given.items():
        _set_dotted(data, key, value)

    try:
        return ExperimentConfig.model_validate(data)
    except PydanticValidationError as e:
        first = e.errors()[0]
        field = '.'.join(str(part) for part in first['loc'])
        message = first['msg'].removeprefix('Value error, ')
        if field in given or first['loc'][:1] and str(first['loc'][0]) in given:
            location = f"command line:{field}"
        else:
            location = f"{source}:{field}"
        raise ConfigError(message, location=location) from e
