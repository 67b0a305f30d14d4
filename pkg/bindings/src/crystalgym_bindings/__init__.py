"""Gymnasium-compatible bindings; importing registers `CrystalGym-v0`."""

from . import compat
from .env import CrystalGymEnv, make_env

ENV_ID = "CrystalGym-v0"


def register_all() -> None:
    """Idempotent registration hook (also wired as package entry-point metadata)."""
    compat.register(ENV_ID, "crystalgym_bindings.env:CrystalGymEnv")


register_all()

__all__ = ["CrystalGymEnv", "make_env", "compat", "ENV_ID", "register_all"]
