"""Report models for the command-line driver.

Every command prints one `ReportEnvelope` as JSON on standard output. The
command-specific `results` object is produced from one of the result models
below, so the published schema (`idlab schema`) describes every field.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, StrictInt, StrictStr, root_validator

SCHEMA_VERSION = "1.0.0"
JSON_SAFE_INT = 2**53
FLOAT_FORMAT = "shortest round-trip decimal (at most 17 significant digits, parses back to the same double)"

# Counts are JSON integers up to 2^53 and decimal strings beyond.
ExactCount = Union[StrictInt, StrictStr]
ExactEnergy = Union[StrictInt, StrictStr]


def exact_count(value: int) -> Union[int, str]:
    return value if abs(value) <= JSON_SAFE_INT else str(value)


def jsonable(value: Any) -> Any:
    """Recursively convert to JSON-native types (numpy scalars, Fractions, big ints)."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return exact_count(int(value))
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, Fraction):
        return exact_count(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return value


class Check(BaseModel):
    """One pass/fail comparison of a measured value against a threshold."""
    name: str
    value: Union[StrictInt, float]
    threshold: Union[StrictInt, float]
    comparison: str = Field("<=", regex=r"^(<=|>=|==)$")
    pass_: bool = Field(..., alias="pass")

    class Config:
        allow_population_by_field_name = True


def check_le(name: str, value: float, threshold: float) -> Check:
    return Check(name=name, value=float(value), threshold=float(threshold), comparison="<=", pass_=bool(value <= threshold))


def check_ge(name: str, value: float, threshold: float) -> Check:
    return Check(name=name, value=float(value), threshold=float(threshold), comparison=">=", pass_=bool(value >= threshold))


def check_eq(name: str, value: int, expected: int) -> Check:
    return Check(name=name, value=int(value), threshold=int(expected), comparison="==", pass_=int(value) == int(expected))


class ReportEnvelope(BaseModel):
    command: str
    params: Dict[str, Any]
    results: Dict[str, Any]
    checks: List[Check]
    pass_: bool = Field(..., alias="pass")
    schema_version: str = SCHEMA_VERSION

    class Config:
        allow_population_by_field_name = True

    @root_validator
    def validate_pass(cls, values):
        checks = values.get("checks") or []
        if "pass_" in values and values["pass_"] != all(c.pass_ for c in checks):
            raise ValueError("pass must be the conjunction of all checks")
        return values

    @classmethod
    def build(cls, command: str, params: Dict[str, Any], results: BaseModel, checks: List[Check]) -> "ReportEnvelope":
        return cls(
            command=command,
            params=jsonable(params),
            results=jsonable(results.dict(by_alias=True)),
            checks=checks,
            pass_=all(c.pass_ for c in checks),
        )

    def render(self) -> str:
        # float repr is the shortest round-trip form
        return json.dumps(jsonable(self.dict(by_alias=True)), indent=2, allow_nan=False)


# -------------------------- Result models -------------------------- #

class AxiomResults(BaseModel):
    dim: int
    trials: int
    residuals: Dict[str, float]
    max_residual: float
    eigenvalues: List[float]
    spectrum_residual: float
    symmetric_dimension: int
    antisymmetric_dimension: int


class EquivalenceSample(BaseModel):
    trial: int
    lhs: float
    rhs: float
    deviation: float
    overlap: float
    lambda_: int = Field(..., alias="lambda")

    class Config:
        allow_population_by_field_name = True


class EquivalenceResults(BaseModel):
    dim: int
    trials: int
    statistics: str
    max_deviation: float
    max_relative_deviation: float
    max_overlap: float
    max_statistics_gap: float
    worst: EquivalenceSample


class FappResults(BaseModel):
    dim: int
    trials: int
    statistics: str
    overlaps: List[float]
    max_deviations: List[float]
    slope: float
    intercept: float
    all_within_bound: bool


class OccupationRow(BaseModel):
    occupation: Dict[str, int]
    multiplicity: ExactCount


class CountResults(BaseModel):
    particles: int
    energy: ExactEnergy
    w_dist: ExactCount = Field(..., alias="W_dist")
    w_bose: ExactCount = Field(..., alias="W_bose")
    w_fermi: ExactCount = Field(..., alias="W_fermi")
    w_ident: Optional[ExactCount] = Field(None, alias="W_ident")
    w_dist_brute_force: Optional[ExactCount] = Field(None, alias="W_dist_brute_force")
    gibbs_holds: bool
    gibbs_witness: Optional[Dict[str, int]] = None
    occupations: List[OccupationRow]
    entropy_gap: Optional[float] = None

    class Config:
        allow_population_by_field_name = True


class GaussianFamilyResults(BaseModel):
    count: int
    overlaps: List[List[float]]
    worst_overlap: float
    verdict: str


class GaussianResults(BaseModel):
    separation: float
    sigma: float
    overlap: float
    quadrature: float
    agreement: float
    verdict: str
    threshold: float
    family: Optional[GaussianFamilyResults] = None


class WellResults(BaseModel):
    name: Optional[str]
    barrier_height: float
    e_even: float
    e_odd: float
    e_third: float
    splitting: float
    next_gap: float
    left_mass: float
    right_mass: float
    lr_overlap: float
    even_odd_overlap: float
    residual: float
    box_splitting: Optional[float] = None
    equivalence: Optional[Dict[str, Any]] = None


class DoubleWellResults(BaseModel):
    wells: List[WellResults]
    splittings: List[float]
    strictly_decreasing: Optional[bool] = None


class ExtensivityResults(BaseModel):
    copies: int
    combined_w_dist: ExactCount = Field(..., alias="combined_W_dist")
    combined_w_ident: ExactCount = Field(..., alias="combined_W_ident")
    identical_gap: Optional[float]
    distinguishable_gap: Optional[float]
    partition_term: float
    corrected_gap: Optional[float]

    class Config:
        allow_population_by_field_name = True


class EntropyResults(BaseModel):
    particles: int
    energy: ExactEnergy
    statistics: str
    w_dist: ExactCount = Field(..., alias="W_dist")
    w_ident: ExactCount = Field(..., alias="W_ident")
    ln_w_dist: Optional[float] = Field(..., alias="ln_W_dist")
    ln_w_ident: Optional[float] = Field(..., alias="ln_W_ident")
    gibbs_correction: float
    corrected: Optional[float]
    multiplicity_free: bool
    extensivity: Optional[ExtensivityResults] = None

    class Config:
        allow_population_by_field_name = True


RESULT_MODELS = {
    "axioms": AxiomResults,
    "equivalence": EquivalenceResults,
    "fapp": FappResults,
    "count": CountResults,
    "gaussian": GaussianResults,
    "doublewell": DoubleWellResults,
    "entropy": EntropyResults,
}


def published_schema() -> Dict[str, Any]:
    """Envelope schema plus the schema of every command's results object."""
    return {
        "schema_version": SCHEMA_VERSION,
        "float_format": FLOAT_FORMAT,
        "envelope": ReportEnvelope.schema(by_alias=True),
        "results": {name: model.schema(by_alias=True) for name, model in RESULT_MODELS.items()},
    }


__all__ = [
    "SCHEMA_VERSION", "FLOAT_FORMAT", "Check", "ReportEnvelope", "RESULT_MODELS",
    "check_le", "check_ge", "check_eq", "exact_count", "jsonable", "published_schema",
    "AxiomResults", "EquivalenceSample", "EquivalenceResults", "FappResults",
    "OccupationRow", "CountResults", "GaussianFamilyResults", "GaussianResults",
    "WellResults", "DoubleWellResults", "ExtensivityResults", "EntropyResults",
]
