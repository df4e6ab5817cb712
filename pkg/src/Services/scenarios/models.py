"""JSON-ingestible specifications for the Gaussian and double-well scenarios."""
from __future__ import annotations

import json
import logging
import os
from typing import Optional, Type, TypeVar

from pydantic import BaseModel, Field, ValidationError, conint, confloat, validator

from src.Services.hilbert.hilbert_space import FormalismError

logger = logging.getLogger(__name__)

MIN_GRID_POINTS = 201
MAX_GRID_POINTS = 20001
PRESET_NAMES = ("none", "medium", "high")


class ScenarioSpecError(FormalismError):
    """Custom exception for scenario files that cannot be read or validated"""
    pass


class GaussianSpec(BaseModel):
    """Two Gaussian wave packets a distance `separation` apart.

    `sigma` is the standard deviation of |ψ|², i.e.
    ψ(x) = (2πσ²)^(-1/4) exp(-(x - x₀)²/(4σ²)).
    """
    separation: float = Field(..., ge=0, description="Distance D between the two centers")
    sigma: float = Field(..., gt=0, description="Standard deviation of the probability density")

    class Config:
        extra = "forbid"
        allow_mutation = False


class WellSpec(BaseModel):
    """Symmetric rectangular double well on [-L, L] with hard walls.

    V(x) = barrier_height for |x - barrier_offset| ≤ barrier_half_width,
    V(x) = -well_depth elsewhere inside the box.
    """
    name: Optional[str] = Field(None, description="Preset name, if any")
    grid_points: conint(strict=True, ge=MIN_GRID_POINTS, le=MAX_GRID_POINTS) = Field(..., description="Interior grid points (odd)")
    domain_half_width: float = Field(..., gt=0, description="Half width L of the box")
    barrier_height: float = Field(..., ge=0, description="Potential on the barrier")
    barrier_half_width: float = Field(..., ge=0, description="Half width of the central barrier")
    well_depth: float = Field(0.0, ge=0, description="Depth of the two wells below zero")
    barrier_offset: float = Field(0.0, description="Barrier center; nonzero breaks the mirror symmetry")
    min_left_mass: Optional[confloat(ge=0, le=1)] = Field(
        None, description="Localization the left state must reach; checked by `idlab doublewell` unless overridden"
    )

    class Config:
        extra = "forbid"
        allow_mutation = False

    @validator("grid_points")
    def validate_odd_grid(cls, v):
        if v % 2 == 0:
            raise ValueError("grid_points must be odd so the grid is symmetric about the center")
        return v

    @validator("barrier_offset", always=True)
    def validate_barrier_inside(cls, v, values):
        half = values.get("domain_half_width")
        width = values.get("barrier_half_width")
        if half is not None and width is not None and abs(v) + width >= half:
            raise ValueError("Barrier must lie strictly inside the domain")
        return v

    @property
    def is_symmetric(self) -> bool:
        return self.barrier_offset == 0.0

    def with_barrier(self, height: float) -> "WellSpec":
        return WellSpec(**{**self.dict(), "barrier_height": height, "name": f"{self.name or 'custom'}@{height:g}"})


SpecModel = TypeVar("SpecModel", bound=BaseModel)


def _load(path: str, model: Type[SpecModel]) -> SpecModel:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
        return model.parse_obj(payload)
    except (OSError, json.JSONDecodeError) as e:
        raise ScenarioSpecError(f"Cannot read {model.__name__} file '{path}': {e}") from e
    except ValidationError as e:
        raise ScenarioSpecError(f"Invalid {model.__name__} file '{path}': {e}") from e


def load_well_spec(path: str) -> WellSpec:
    spec = _load(path, WellSpec)
    logger.info("Loaded well spec '%s' from %s", spec.name, path)
    return spec


def load_gaussian_spec(path: str) -> GaussianSpec:
    return _load(path, GaussianSpec)


def load_preset(name: str, preset_dir: str) -> WellSpec:
    """Load one of the shipped barrier presets (none, medium, high)."""
    if name not in PRESET_NAMES:
        raise ScenarioSpecError(f"Unknown preset '{name}'. Supported: {', '.join(PRESET_NAMES)}")
    return load_well_spec(os.path.join(preset_dir, f"{name}.json"))


__all__ = [
    "ScenarioSpecError", "GaussianSpec", "WellSpec", "PRESET_NAMES",
    "load_well_spec", "load_gaussian_spec", "load_preset",
]
