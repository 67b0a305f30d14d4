"""Gymnasium interop layer.

When gymnasium is importable the real registry and base classes are used.
Otherwise a minimal API-compatible substitute provides the same env
construction path (register by id -> make(id)), so downstream code and the
parity tests run unchanged.
"""

from __future__ import annotations

import importlib

import numpy as np

try:
    gymnasium = importlib.import_module("gymnasium")
except ImportError:
    gymnasium = None

HAVE_GYMNASIUM = gymnasium is not None

if HAVE_GYMNASIUM:
    Env = gymnasium.Env
    Discrete = gymnasium.spaces.Discrete
    Box = gymnasium.spaces.Box

    def register(env_id: str, entry_point: str, **kwargs) -> None:
        if env_id not in gymnasium.registry:
            gymnasium.register(id=env_id, entry_point=entry_point, **kwargs)

    def make(env_id: str, **kwargs):
        return gymnasium.make(env_id, disable_env_checker=True, **kwargs).unwrapped

else:
    class Env:
        """Standard env surface: reset/step/close plus space descriptors."""

        observation_space = None
        action_space = None
        metadata: dict = {}

        def reset(self, *, seed=None, options=None):
            raise NotImplementedError

        def step(self, action):
            raise NotImplementedError

        def close(self):
            pass

        @property
        def unwrapped(self):
            return self

    class Discrete:
        def __init__(self, n: int, seed=None):
            self.n = int(n)
            self._rng = np.random.default_rng(seed)

        def sample(self) -> int:
            return int(self._rng.integers(self.n))

        def contains(self, x) -> bool:
            return 0 <= int(x) < self.n

        def __repr__(self):
            return f"Discrete({self.n})"

    class Box:
        def __init__(self, low, high, shape, dtype=np.float64):
            self.low = low
            self.high = high
            self.shape = tuple(shape)
            self.dtype = dtype

        def contains(self, x) -> bool:
            x = np.asarray(x)
            return x.shape == self.shape

        def __repr__(self):
            return f"Box(shape={self.shape})"

    _REGISTRY: dict[str, tuple[str, dict]] = {}

    def register(env_id: str, entry_point: str, **kwargs) -> None:
        _REGISTRY[env_id] = (entry_point, kwargs)

    def make(env_id: str, **kwargs):
        if env_id not in _REGISTRY:
            raise KeyError(f"environment id {env_id!r} is not registered")
        entry_point, base_kwargs = _REGISTRY[env_id]
        module_name, _, attr = entry_point.partition(":")
        cls = getattr(importlib.import_module(module_name), attr)
        merged = {**base_kwargs, **kwargs}
        return cls(**merged)
