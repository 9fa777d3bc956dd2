"""
Run configuration: unit-suffixed quantities, grid ranges and the validated RunConfig
"""
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional
import json
import math
import re

import click
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import __version__
from .errors import ConfigError
from .models import FocusGeometry

UNITS: Dict[str, Dict[str, float]] = {
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "μm": 1e-6, "nm": 1e-9},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6},
    "temperature": {"K": 1.0, "mK": 1e-3, "uK": 1e-6, "µK": 1e-6, "μK": 1e-6, "nK": 1e-9},
    "power": {"W": 1.0, "mW": 1e-3, "uW": 1e-6, "µW": 1e-6, "μW": 1e-6, "nW": 1e-9,
              "pW": 1e-12},
    "dimensionless": {},
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zµμ]*)\s*$")


def parse_quantity(text: str, kind: str = "length") -> float:
    """Canonicalize '4.5mm', '780 nm', '100uK' ... to SI; a bare number is already SI"""
    if kind not in UNITS:
        raise ConfigError(f"unknown quantity kind '{kind}'", context={"kind": kind})
    match = _QUANTITY.match(str(text))
    if match is None:
        raise ConfigError(f"cannot parse '{text}' as a {kind}", context={"text": text})
    number, suffix = match.groups()
    value = float(number)
    if not suffix:
        return value
    scale = UNITS[kind].get(suffix)
    if scale is None:
        raise ConfigError(f"unknown {kind} unit '{suffix}'",
                          context={"text": text, "allowed": sorted(UNITS[kind])})
    return value * scale


def parse_range(text: str, kind: str = "dimensionless") -> List[float]:
    """Inclusive arithmetic grid from 'start:stop:step'"""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError("range must look like start:stop:step", context={"text": text})
    start, stop, step = (parse_quantity(part, kind) for part in parts)
    if not step > 0.0:
        raise ConfigError("range step must be > 0", context={"text": text})
    if stop < start:
        raise ConfigError("range stop must not precede start", context={"text": text})
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


class Quantity(click.ParamType):
    """Click parameter accepting unit-suffixed values"""

    name = "quantity"

    def __init__(self, kind: str = "length"):
        self.kind = kind

    def convert(self, value: Any, param: Optional[click.Parameter],
                ctx: Optional[click.Context]) -> float:
        if isinstance(value, float):
            return value
        try:
            return parse_quantity(value, self.kind)
        except ConfigError as e:
            self.fail(e.describe(), param, ctx)


class GridRange(click.ParamType):
    """Click parameter for start:stop:step grids"""

    name = "range"

    def __init__(self, kind: str = "dimensionless"):
        self.kind = kind

    def convert(self, value: Any, param: Optional[click.Parameter],
                ctx: Optional[click.Context]) -> List[float]:
        if isinstance(value, list):
            return value
        try:
            return parse_range(value, self.kind)
        except ConfigError as e:
            self.fail(e.describe(), param, ctx)


class Command(str, Enum):
    FIELD_AXIAL = "field-axial"
    FIELD_FOCAL_PLANE = "field-focal-plane"
    FIELD_MAP = "field-map"
    RSC_SCAN = "rsc-scan"
    EXTINCTION_SCAN = "extinction-scan"
    TABLE1 = "table1"
    FIT_SPECTRUM = "fit-spectrum"
    OPTIMUM = "optimum"
    MOTION = "motion"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """Everything one CLI invocation computes from, validated up front"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command
    w_l: Optional[float] = Field(default=None, gt=0)
    f: float = Field(default=4.5e-3, gt=0)
    wavelength: float = Field(default=780e-9, gt=0)
    rho0: Optional[float] = Field(default=None, gt=0)
    na: Optional[float] = Field(default=None, gt=0, lt=1)
    output: Optional[Path] = None
    output_format: OutputFormat = OutputFormat.CSV
    grid_size: int = Field(default=512, ge=64)
    relative_tolerance: float = Field(default=1e-8, gt=0, le=1e-3)
    workers: int = Field(default=1, ge=1)
    seed: Optional[int] = None
    parameters: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_geometry(self) -> "RunConfig":
        if self.rho0 is not None and self.na is not None:
            raise ValueError("give either rho0 or na, not both")
        if self.w_l is not None:
            # FocusGeometry raises DomainError, a ValueError, on bad values
            self.geometry()
        return self

    def geometry(self) -> FocusGeometry:
        if self.w_l is None:
            raise ConfigError("this command needs the input waist --w-l",
                              context={"command": self.command.value})
        return FocusGeometry.create(w_l=self.w_l, f=self.f, wavelength=self.wavelength,
                                    rho0=self.rho0, na=self.na)

    def provenance(self) -> str:
        """Single-line JSON of the config and tool version for file headers"""
        payload = {"tool": "atomlens", "version": __version__,
                   "config": json.loads(self.model_dump_json())}
        return json.dumps(payload, sort_keys=True)
