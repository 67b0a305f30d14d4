"""Deterministic band-gap mock reproducing DFT's failure-prone, zero-heavy output."""

from __future__ import annotations

import hashlib
import math

from ..properties import BAND_GAP
from ..structure import Structure
from .base import Calculator, CalculatorResult, check_filled


def _hash_uniforms(structure_hash: str, composition, seed: int, n: int = 3):
    """n reproducible uniforms in [0, 1) from a content hash."""
    payload = f"{structure_hash}|{','.join(composition)}|{seed}".encode()
    digest = hashlib.sha256(payload).digest()
    out = []
    for i in range(n):
        chunk = digest[8 * i: 8 * i + 8]
        out.append(int.from_bytes(chunk, "big") / 2.0 ** 64)
    return out


class MockBandGapCalculator(Calculator):
    """Pure function of (structure hash, composition, seed).

    A composition either fails (probability ~ failure_rate over random
    compositions) or maps to a zero-inflated gap: exactly 0 with zero_prob,
    otherwise exponential with the configured mean, clipped to [0, max_gap].
    """

    property_id = BAND_GAP
    calculator_id = "mock-band-gap-v1"

    def __init__(self, seed: int = 0, failure_rate: float = 0.2,
                 zero_prob: float = 0.5, mean_gap: float = 1.0, max_gap: float = 5.0):
        if not 0.0 <= failure_rate <= 1.0:
            raise ValueError(f"failure_rate must be in [0, 1], got {failure_rate}")
        self.seed = seed
        self.failure_rate = failure_rate
        self.zero_prob = zero_prob
        self.mean_gap = mean_gap
        self.max_gap = max_gap

    def compute(self, structure: Structure, composition) -> CalculatorResult:
        comp = check_filled(composition)
        u_fail, u_zero, u_gap = _hash_uniforms(structure.content_hash(), comp, self.seed)
        if u_fail < self.failure_rate:
            return CalculatorResult.fail("simulated")
        if u_zero < self.zero_prob:
            return CalculatorResult.ok(0.0)
        gap = -self.mean_gap * math.log(1.0 - u_gap)
        return CalculatorResult.ok(min(gap, self.max_gap))
