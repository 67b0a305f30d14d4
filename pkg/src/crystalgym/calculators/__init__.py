"""Property calculators behind one compute(structure, composition) interface."""

from ..errors import ConfigError
from ..properties import BAND_GAP, BULK_MODULUS, DENSITY
from .bandgap import MockBandGapCalculator
from .base import Calculator, CalculatorResult, PropertyCacheKey
from .cache import CachedCalculator, ResultCache
from .density import DensityCalculator, cell_density
from .eos import EOSFit, fit_murnaghan, murnaghan_energy
from .espresso import QECalculator, parse_qe_output, render_qe_input, write_qe_input
from .pairpot import PairPotentialBulkModulusCalculator, pair_energy, scan_bulk_modulus

__all__ = [
    "Calculator", "CalculatorResult", "PropertyCacheKey", "CachedCalculator",
    "ResultCache", "DensityCalculator", "cell_density", "EOSFit", "fit_murnaghan",
    "murnaghan_energy", "MockBandGapCalculator", "QECalculator", "parse_qe_output",
    "render_qe_input", "write_qe_input", "PairPotentialBulkModulusCalculator",
    "pair_energy", "scan_bulk_modulus", "make_calculator",
]


def make_calculator(calculator_id: str, prop: str, seed: int = 0,
                    qe_command: str | None = None, workdir=None) -> Calculator:
    """Build a calculator by harness id: exact | surrogate | mock | qe.

    `exact` and `surrogate` resolve to the analytic calculator matching the
    property; `qe` needs a workdir (and a command to actually execute).
    """
    if calculator_id in ("exact", "surrogate", "mock"):
        if prop == DENSITY:
            return DensityCalculator()
        if prop == BULK_MODULUS:
            return PairPotentialBulkModulusCalculator()
        if prop == BAND_GAP:
            return MockBandGapCalculator(seed=seed)
        raise ConfigError(f"unknown property {prop!r}")
    if calculator_id == "qe":
        if workdir is None:
            raise ConfigError("qe calculator needs a workdir")
        return QECalculator(prop, workdir, command=qe_command)
    raise ConfigError(f"unknown calculator {calculator_id!r}")
