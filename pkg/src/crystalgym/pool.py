"""Bundled benchmark pool: seven cubic skeletons with 4-8 sites."""

from __future__ import annotations

from importlib import resources

from .errors import ConfigError
from .structure import Structure, parse_structure

POOL_NAMES = ("rocksalt", "zincblende", "perovskite", "cu3au", "reo3", "a15", "b20")

# default train/eval split for the mixed-structure setting
MIXED_TRAIN = ("rocksalt", "zincblende", "perovskite", "cu3au", "reo3")
MIXED_EVAL = ("a15", "b20")


def load_structure(name: str) -> Structure:
    if name not in POOL_NAMES:
        raise ConfigError(f"unknown structure {name!r}; pool has {POOL_NAMES}")
    text = resources.files("crystalgym.data").joinpath(f"{name}.crystal").read_text("utf-8")
    return parse_structure(text)


def load_pool(names=POOL_NAMES) -> list[Structure]:
    return [load_structure(n) for n in names]
