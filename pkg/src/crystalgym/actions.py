"""Discrete action spaces: ordered element subsets of the periodic table."""

from __future__ import annotations

from dataclasses import dataclass, field

from .elements import element
from .errors import ConfigError

SMALL_ELEMENTS = ("Li", "Na", "K", "Rb", "Be", "Ca", "Mg", "Sr",
                  "H", "C", "N", "O", "P", "S", "Se", "F", "Cl", "Br")

MEDIUM_ELEMENTS = SMALL_ELEMENTS + ("B", "Si", "Ge", "Fe", "Cu", "Co",
                                    "Ni", "Mn", "Al", "Zn", "Sn", "Cr")

LARGE_ELEMENTS = MEDIUM_ELEMENTS + ("In", "Sb", "V", "Mo", "Ga", "Ag", "Ti",
                                    "Ba", "Y", "Te", "I", "Pd", "Rh", "As",
                                    "Pt", "Cs", "Au", "Bi", "Zr", "La")


@dataclass(frozen=True)
class ActionSpace:
    elements: tuple[str, ...]
    id: str = "custom"
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.elements)) != len(self.elements):
            raise ConfigError("duplicate elements in action space")
        for sym in self.elements:
            element(sym)  # raises LookupError for unknown symbols
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.elements)})

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ConfigError(f"element {symbol!r} not in action space {self.id!r}") from None

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index


def action_space(space_id: str) -> ActionSpace:
    """Build one of the preset spaces (small/medium/large) by id."""
    presets = {"small": SMALL_ELEMENTS, "medium": MEDIUM_ELEMENTS, "large": LARGE_ELEMENTS}
    if space_id not in presets:
        raise ConfigError(f"unknown action space {space_id!r}; expected one of {sorted(presets)}")
    return ActionSpace(presets[space_id], id=space_id)


def custom_action_space(elements) -> ActionSpace:
    return ActionSpace(tuple(elements), id="custom")
