"""Level specifications for microstate counting.

A level file is JSON of the form

    {"energies": [1, "2.5", "1/3"], "labels": ["a", "b", "c"]}

Energies are integers or decimal/rational strings; JSON floats are rejected so
that no binary rounding ever reaches the energy match. Internally the energies
are cleared to a common denominator and compared as exact integers.
"""
from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, StrictInt, StrictStr, ValidationError, validator

from src.Services.hilbert.hilbert_space import FormalismError

logger = logging.getLogger(__name__)

ExactValue = Union[int, str, Fraction]

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")
_RATIO = re.compile(r"^[+-]?\d+/[1-9]\d*$")


class LevelSpecError(FormalismError):
    """Custom exception for level files that cannot be read or parsed"""
    pass


def parse_exact(value: ExactValue) -> Fraction:
    """Parse an int, Fraction, decimal string ("2.5") or ratio string ("1/3") exactly.

    Raises:
        LevelSpecError: For floats, booleans or malformed strings
    """
    if isinstance(value, bool):
        raise LevelSpecError("Booleans are not energies")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if _DECIMAL.match(text) or _RATIO.match(text):
            return Fraction(text)
        raise LevelSpecError(f"Not an exact decimal or ratio: '{value}'")
    raise LevelSpecError(f"Energies must be integers or strings, got {type(value).__name__}")


def format_exact(value: Fraction) -> Union[int, str]:
    """Integers stay integers; other rationals render as 'p/q'."""
    return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


class LevelSpecDocument(BaseModel):
    """JSON document for a set of single-particle levels."""
    energies: List[Union[StrictInt, StrictStr]]
    labels: Optional[List[StrictStr]] = None

    class Config:
        extra = "forbid"

    @validator("energies")
    def validate_energies(cls, v):
        if not v:
            raise ValueError("At least one energy level is required")
        for item in v:
            parse_exact(item)
        return v

    @validator("labels")
    def validate_labels(cls, v, values):
        energies = values.get("energies")
        if v is not None and energies is not None and len(v) != len(energies):
            raise ValueError(f"Got {len(v)} labels for {len(energies)} energies")
        return v


@dataclass(frozen=True)
class LevelSpec:
    """M single-particle levels with exact energies.

    Degenerate levels are distinct entries with equal energy. `scaled` holds the
    energies multiplied by `scale`, the least common multiple of the denominators.
    """
    energies: Tuple[Fraction, ...]
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if not self.energies:
            raise LevelSpecError("A level spec needs at least one level")
        if self.labels is not None and len(self.labels) != len(self.energies):
            raise LevelSpecError("labels and energies differ in length")

    @classmethod
    def from_values(cls, energies: Sequence[ExactValue], labels: Optional[Sequence[str]] = None) -> "LevelSpec":
        return cls(
            energies=tuple(parse_exact(e) for e in energies),
            labels=tuple(labels) if labels is not None else None,
        )

    @classmethod
    def from_document(cls, document: LevelSpecDocument) -> "LevelSpec":
        return cls.from_values(document.energies, document.labels)

    @property
    def size(self) -> int:
        return len(self.energies)

    @property
    def scale(self) -> int:
        return math.lcm(*(e.denominator for e in self.energies))

    @property
    def scaled(self) -> Tuple[int, ...]:
        scale = self.scale
        return tuple(int(e * scale) for e in self.energies)

    def scaled_total(self, energy: ExactValue) -> Optional[int]:
        """Total energy on the integer scale, or None when no level sum can reach it."""
        value = parse_exact(energy) * self.scale
        return int(value) if value.denominator == 1 else None

    def label(self, index: int) -> str:
        return self.labels[index] if self.labels else f"level_{index}"

    def to_document(self) -> LevelSpecDocument:
        return LevelSpecDocument(
            energies=[str(format_exact(e)) for e in self.energies],
            labels=list(self.labels) if self.labels else None,
        )


def load_level_spec(path: str) -> LevelSpec:
    """Read a LevelSpec JSON file.

    Raises:
        LevelSpecError: If the file is unreadable, not JSON, or fails validation
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
        document = LevelSpecDocument.parse_obj(payload)
    except (OSError, json.JSONDecodeError) as e:
        raise LevelSpecError(f"Cannot read level file '{path}': {e}") from e
    except ValidationError as e:
        raise LevelSpecError(f"Invalid level file '{path}': {e}") from e

    spec = LevelSpec.from_document(document)
    logger.info("Loaded %d levels from %s", spec.size, path)
    return spec


__all__ = [
    "LevelSpecError", "LevelSpecDocument", "LevelSpec",
    "parse_exact", "format_exact", "load_level_spec",
]
