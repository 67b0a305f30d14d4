"""Pair-potential energy model and the bulk-modulus scan built on it.

Stands in for the expensive single-point energy evaluations: any smooth
E(V) with curvature exercises the identical volume-scan + EOS-fit pipeline.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .. import kernels
from ..elements import element
from ..errors import FitError
from ..properties import BULK_MODULUS
from ..structure import Structure
from .base import Calculator, CalculatorResult, check_filled
from .eos import fit_murnaghan

PAIR_CUTOFF = 8.0  # Angstrom, reference-cell neighbor selection
STRAINS = tuple(s / 100.0 for s in range(-4, 5))  # nine isotropic linear strains

_SIXTH_ROOT_2 = 2.0 ** (1.0 / 6.0)


def well_depth(symbol: str) -> float:
    """Fixed per-element well depth (eV); deeper for heavier elements."""
    return min(0.15 + 0.012 * element(symbol).Z, 1.5)


def _shift_range(structure: Structure, cutoff: float) -> int:
    m = structure.lattice.matrix
    vol = structure.lattice.volume
    heights = [vol / np.linalg.norm(np.cross(m[(i + 1) % 3], m[(i + 2) % 3])) for i in range(3)]
    return max(1, int(math.ceil(cutoff / min(heights))))


def pair_energy(structure: Structure, composition, scale: float = 1.0,
                cutoff: float = PAIR_CUTOFF) -> float:
    """Lennard-Jones-style lattice energy (eV) at an isotropic length scale.

    The interacting pair set is fixed at the reference cell (d <= cutoff at
    scale 1) so the energy stays smooth along a volume scan.
    """
    comp = check_filled(composition)
    src, dst, _, dists = kernels.neighbor_pairs(
        structure.sites, structure.lattice.matrix, cutoff,
        _shift_range(structure, cutoff))
    if len(src) == 0:
        return 0.0
    radii = np.array([element(sym).covalent_radius for sym in comp])
    eps = np.array([well_depth(sym) for sym in comp])
    sigma = (radii[src] + radii[dst]) / _SIXTH_ROOT_2
    eps_ij = np.sqrt(eps[src] * eps[dst])
    x6 = (sigma / (dists * scale)) ** 6
    # ordered pairs double-count each bond
    return float(0.5 * np.sum(4.0 * eps_ij * (x6 * x6 - x6)))


def scan_bulk_modulus(energy_at_scale, volume: float,
                      strains=STRAINS) -> tuple[CalculatorResult, list]:
    """Evaluate E at isotropic strains, fit the EOS, return B0 (GPa).

    Reports failure when the fit breaks down or the fitted equilibrium
    volume falls outside the scanned window (no minimum in range).
    """
    start = time.perf_counter()
    points = []
    for s in strains:
        scale = 1.0 + s
        points.append((volume * scale ** 3, energy_at_scale(scale)))
    volumes = [v for v, _ in points]
    try:
        fit = fit_murnaghan(points)
    except FitError:
        return CalculatorResult.fail("simulated", time.perf_counter() - start), points
    if not min(volumes) <= fit.V0 <= max(volumes):
        return CalculatorResult.fail("simulated", time.perf_counter() - start), points
    return CalculatorResult.ok(fit.B0, time.perf_counter() - start), points


class PairPotentialBulkModulusCalculator(Calculator):
    property_id = BULK_MODULUS
    calculator_id = "pairpot-bulk-modulus-v1"

    def __init__(self, cutoff: float = PAIR_CUTOFF, strains=STRAINS):
        self.cutoff = cutoff
        self.strains = tuple(strains)

    def compute(self, structure, composition) -> CalculatorResult:
        comp = check_filled(composition)
        result, _ = scan_bulk_modulus(
            lambda scale: pair_energy(structure, comp, scale=scale, cutoff=self.cutoff),
            structure.lattice.volume, self.strains)
        return result
