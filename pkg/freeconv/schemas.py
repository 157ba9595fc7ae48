"""
Pydantic schemas for the free convolution engine.

Organized by domain:
    - Measure specs (JSON objects and command-line shorthands)
    - Subordination, support and density output records
    - Monte Carlo spectrum metadata
    - CLI run configuration
"""

import json
import os
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator

from freeconv import config
from freeconv.errors import SpecError


# ── Measure specs ────────────────────────────────────────────────────────────


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class JacobiSpec(_Spec):
    """General Jacobi-type measure; centered automatically on construction."""
    type: Literal["jacobi"] = "jacobi"
    support: Tuple[float, float]
    t_minus: float = Field(gt=-1.0, lt=1.0)
    t_plus: float = Field(gt=-1.0, lt=1.0)
    smooth_cheb: List[float] = Field(default_factory=lambda: [1.0], min_length=1)

    @field_validator("support")
    @classmethod
    def _ordered(cls, v):
        if not v[0] < v[1]:
            raise ValueError(f"support must satisfy lower < upper, got {list(v)}")
        return v


class SemicircleSpec(_Spec):
    type: Literal["semicircle"] = "semicircle"
    variance: float = Field(default=1.0, gt=0.0)


class ArcsineSpec(_Spec):
    type: Literal["arcsine"] = "arcsine"
    radius: float = Field(default=2.0, gt=0.0)


class MarchenkoPasturSpec(_Spec):
    type: Literal["marchenko_pastur"] = "marchenko_pastur"
    ratio: float = Field(gt=0.0, lt=1.0)


MeasureSpec = Annotated[
    Union[JacobiSpec, SemicircleSpec, ArcsineSpec, MarchenkoPasturSpec],
    Field(discriminator="type"),
]

_MEASURE_ADAPTER = TypeAdapter(MeasureSpec)

_SHORTHAND_KINDS = {
    "semicircle": ("semicircle", "variance"),
    "arcsine": ("arcsine", "radius"),
    "mp": ("marchenko_pastur", "ratio"),
    "marchenko_pastur": ("marchenko_pastur", "ratio"),
}


def _parse_shorthand(text: str) -> dict:
    kind, _, params = text.partition(":")
    kind = kind.strip().lower()
    try:
        values = [float(p) for p in params.split(",")] if params.strip() else []
    except ValueError as e:
        raise SpecError(f"cannot parse numbers in measure shorthand {text!r}") from e

    if kind in _SHORTHAND_KINDS:
        name, field = _SHORTHAND_KINDS[kind]
        if len(values) > 1:
            raise SpecError(f"{kind} takes one parameter, got {text!r}")
        return {"type": name, **({field: values[0]} if values else {})}
    if kind == "jacobi":
        if len(values) < 4:
            raise SpecError(f"jacobi shorthand needs a,b,t-,t+ (got {text!r})")
        a, b, t_minus, t_plus, *cheb = values
        return {
            "type": "jacobi",
            "support": [a, b],
            "t_minus": t_minus,
            "t_plus": t_plus,
            "smooth_cheb": cheb or [1.0],
        }
    raise SpecError(f"unknown measure kind {kind!r} in {text!r}")


def parse_measure_spec(text: str) -> MeasureSpec:
    """Parse inline JSON, a JSON file path, or a shorthand such as ``semicircle:1``."""
    text = text.strip()
    try:
        if text.startswith("{"):
            raw = json.loads(text)
        elif os.path.isfile(text):
            with open(text, "r", encoding="utf-8") as f:
                raw = json.load(f)
        else:
            raw = _parse_shorthand(text)
        return _MEASURE_ADAPTER.validate_python(raw)
    except json.JSONDecodeError as e:
        raise SpecError(f"measure spec is not valid JSON: {e}") from e
    except ValidationError as e:
        raise SpecError(f"invalid measure spec {text!r}: {e.errors(include_url=False)}") from e


def dump_measure_spec(spec: MeasureSpec) -> dict:
    return spec.model_dump(mode="json")


# ── Output records ───────────────────────────────────────────────────────────


Pair = Tuple[float, float]


class SubordinationRecord(BaseModel):
    """One solved spectral parameter; complex values as [re, im]."""
    z: Pair
    omega_alpha: Pair
    omega_beta: Pair
    m: Pair
    iterations: int
    residual: float


class AlphaBeta(BaseModel):
    alpha: Pair
    beta: Pair


class SupportRecord(BaseModel):
    E_minus: float
    E_plus: float
    omega: AlphaBeta
    gamma: AlphaBeta
    edge_residuals: Pair


class DensityMetadata(BaseModel):
    eta_used: float
    n: int
    E_minus: float
    E_plus: float
    mass: float
    mean: float
    variance: float


class SpectrumMetadata(BaseModel):
    n_matrix: int
    n_samples: int
    seed: int


class CheckResult(BaseModel):
    """Row of the validation table."""
    suite: str
    check: str
    measured: float
    tolerance: float
    passed: bool
    detail: Optional[str] = None


# ── Run configuration ────────────────────────────────────────────────────────


class RunConfig(BaseModel):
    """Validated command-line configuration."""
    model_config = ConfigDict(extra="forbid")

    command: Literal["support", "density", "subordinate", "validate", "rmt-check", "measure"]
    measure_a: Optional[str] = None
    measure_b: Optional[str] = None
    tol: float = Field(default=config.TOL, gt=0.0)
    eta_min: float = Field(default=config.ETA_MIN, gt=0.0)
    grid_n: int = Field(default=config.GRID_N, ge=16)
    out: Optional[str] = None
    seed: int = config.SEED
    n_matrix: int = Field(default=500, ge=2)
    n_samples: int = Field(default=50, ge=1)
    z: Optional[Tuple[float, float]] = None
    threads: int = Field(default=config.THREADS, ge=1)
    as_json: bool = False
    richardson: bool = False

    @field_validator("z", mode="before")
    @classmethod
    def _parse_z(cls, v):
        if isinstance(v, str):
            parts = [p for p in v.replace(" ", "").split(",") if p]
            if len(parts) != 2:
                raise ValueError(f"--z expects 're,im', got {v!r}")
            return (float(parts[0]), float(parts[1]))
        return v
