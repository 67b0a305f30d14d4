"""Exact volumetric mass density from atomic weights and cell volume."""

from __future__ import annotations

from ..constants import A3_TO_CM3, AVOGADRO
from ..elements import atomic_mass
from ..properties import DENSITY
from ..structure import Structure
from .base import Calculator, CalculatorResult, check_filled


def cell_density(structure: Structure, composition) -> float:
    """(sum of site masses in g/mol) / (N_A * cell volume in cm^3)."""
    comp = check_filled(composition)
    total_mass = sum(atomic_mass(sym) for sym in comp)
    return total_mass / (AVOGADRO * structure.lattice.volume * A3_TO_CM3)


class DensityCalculator(Calculator):
    property_id = DENSITY
    calculator_id = "exact-density-v1"

    def compute(self, structure, composition) -> CalculatorResult:
        return CalculatorResult.ok(cell_density(structure, composition))
