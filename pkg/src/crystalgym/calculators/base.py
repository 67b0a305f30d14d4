"""Calculator interface and result/record types."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from ..errors import ValidationError
from ..properties import check_property
from ..structure import Structure

# failure channels mirrored from the DFT workflow
FAILURE_REASONS = ("convergence", "charge", "timeout", "parse", "simulated")


@dataclass(frozen=True)
class CalculatorResult:
    success: bool
    value: float | None = None
    wall_time: float = 0.0
    failure_reason: str | None = None

    def __post_init__(self):
        if self.success:
            if self.value is None:
                raise ValidationError("successful result must carry a value")
        else:
            if self.value is not None:
                raise ValidationError("failed result must not carry a value")
            if self.failure_reason not in FAILURE_REASONS:
                raise ValidationError(f"failure_reason must be one of {FAILURE_REASONS}")

    @classmethod
    def ok(cls, value: float, wall_time: float = 0.0) -> "CalculatorResult":
        return cls(success=True, value=float(value), wall_time=wall_time)

    @classmethod
    def fail(cls, reason: str, wall_time: float = 0.0) -> "CalculatorResult":
        return cls(success=False, failure_reason=reason, wall_time=wall_time)


def check_filled(composition) -> tuple:
    comp = tuple(composition)
    if any(x is None for x in comp):
        raise ValidationError("all sites must be assigned an element")
    return comp


class Calculator:
    """One target property computed from (structure, per-site composition)."""

    #: property id this calculator produces
    property_id: str
    #: stable identifier + version, part of every cache key
    calculator_id: str

    def compute(self, structure: Structure, composition) -> CalculatorResult:
        raise NotImplementedError


@dataclass(frozen=True)
class PropertyCacheKey:
    structure_hash: str
    composition: tuple
    property_id: str
    calculator_id: str

    def digest(self) -> str:
        payload = "|".join([self.structure_hash, ",".join(self.composition),
                            self.property_id, self.calculator_id])
        return hashlib.sha256(payload.encode()).hexdigest()

    @classmethod
    def for_call(cls, calc: Calculator, structure: Structure, composition) -> "PropertyCacheKey":
        return cls(structure_hash=structure.content_hash(),
                   composition=check_filled(composition),
                   property_id=check_property(calc.property_id),
                   calculator_id=calc.calculator_id)
