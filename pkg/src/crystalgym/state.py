"""MDP state: a crystal skeleton plus per-site occupancy and focus."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .structure import Structure

EMPTY = None  # occupancy label for an unfilled site


@dataclass(frozen=True)
class CrystalState:
    structure: Structure
    occupancy: tuple  # per-site element symbol or EMPTY
    focus: int | None  # next site to fill/replace; None once terminal
    step_count: int = 0

    def __post_init__(self):
        if len(self.occupancy) != self.structure.n_sites:
            raise ValueError("occupancy length must match site count")
        if self.focus is not None and not 0 <= self.focus < self.structure.n_sites:
            raise ValueError(f"focus {self.focus} out of range")

    @property
    def n_sites(self) -> int:
        return self.structure.n_sites

    @property
    def n_filled(self) -> int:
        return sum(1 for x in self.occupancy if x is not EMPTY)

    @property
    def all_filled(self) -> bool:
        return self.n_filled == self.n_sites

    def with_site(self, site: int, symbol: str, new_focus: int | None) -> "CrystalState":
        occ = list(self.occupancy)
        occ[site] = symbol
        return replace(self, occupancy=tuple(occ), focus=new_focus,
                       step_count=self.step_count + 1)

    def composition(self) -> tuple:
        """Per-site element assignment, by site index."""
        return self.occupancy
