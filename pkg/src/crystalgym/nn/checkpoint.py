"""Parameter checkpoints: npz blob with a config echo; loads are validated."""

from __future__ import annotations

import json

import numpy as np

from ..errors import CheckpointMismatchError
from .autograd import Tensor
from .megnet import MegnetConfig

FORMAT_VERSION = 1


def save_checkpoint(path, configs: dict, param_groups: dict, meta: dict | None = None) -> None:
    """configs: group name -> MegnetConfig; param_groups: group name -> params dict."""
    header = {
        "format_version": FORMAT_VERSION,
        "configs": {name: cfg.to_dict() for name, cfg in configs.items()},
        "meta": meta or {},
    }
    arrays = {"__header__": np.frombuffer(json.dumps(header).encode(), dtype=np.uint8)}
    for group, params in param_groups.items():
        for key, tensor in params.items():
            arrays[f"{group}::{key}"] = tensor.data
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path):
    """Returns (configs, param_groups, meta)."""
    with np.load(path) as blob:
        header = json.loads(bytes(blob["__header__"]).decode())
        if header.get("format_version") != FORMAT_VERSION:
            raise CheckpointMismatchError(
                f"checkpoint format {header.get('format_version')} != {FORMAT_VERSION}")
        configs = {name: MegnetConfig.from_dict(d)
                   for name, d in header["configs"].items()}
        param_groups: dict[str, dict] = {name: {} for name in configs}
        for key in blob.files:
            if key == "__header__":
                continue
            group, param_key = key.split("::", 1)
            param_groups.setdefault(group, {})[param_key] = Tensor(
                blob[key].copy(), requires_grad=True)
    return configs, param_groups, header["meta"]


def require_config(loaded: MegnetConfig, expected: MegnetConfig, group: str) -> None:
    if loaded != expected:
        raise CheckpointMismatchError(
            f"checkpoint group {group!r} was saved with {loaded}, expected {expected}")
