"""Standard-API environment bound to the primary crystal MDP.

Observations are the primary component's flat vectors (format flat-v1:
padded node one-hots row-major, then the global feature block); the
structured graph mapping rides along in `info["graph"]`. The binding adds
no behavior of its own.
"""

from __future__ import annotations

import numpy as np

from crystalgym.actions import action_space, custom_action_space
from crystalgym.calculators import make_calculator
from crystalgym.env import CrystalEnv, EpisodeConfig
from crystalgym.errors import ConfigError
from crystalgym.featurize import FLAT_FORMAT_VERSION
from crystalgym.pool import POOL_NAMES, load_structure

from . import compat

_KNOWN_KEYS = {"property", "target", "structures", "mode", "traversal",
               "action_space", "seed", "calculator", "calculator_seed",
               "cutoff", "shift_range", "rho"}


def _episode_config(config: dict) -> tuple[EpisodeConfig, str, int]:
    unknown = set(config) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    for required in ("property", "target"):
        if required not in config:
            raise ConfigError(f"missing config key {required!r}")
    structures = config.get("structures", list(POOL_NAMES))
    if isinstance(structures, str):
        structures = [structures]
    pool = [load_structure(name) for name in structures]
    space_spec = config.get("action_space", "small")
    if isinstance(space_spec, str):
        space = action_space(space_spec)
    else:
        space = custom_action_space(space_spec)
    episode = EpisodeConfig(
        prop=config["property"],
        target=float(config["target"]),
        pool=pool,
        action_space=space,
        mode=config.get("mode", "completion"),
        traversal=config.get("traversal", "fixed"),
        seed=int(config.get("seed", 0)),
    )
    return episode, config.get("calculator", "exact"), int(config.get("calculator_seed", 0))


class CrystalGymEnv(compat.Env):
    """reset() -> (obs, info); step(a) -> (obs, reward, terminated, truncated, info)."""

    metadata = {"render_modes": [], "obs_format": FLAT_FORMAT_VERSION}

    def __init__(self, **config):
        episode, calculator_id, calc_seed = _episode_config(config)
        calculator = make_calculator(calculator_id, episode.prop, seed=calc_seed)
        kwargs = {}
        for key, arg in (("cutoff", "cutoff"), ("shift_range", "shift_range"),
                         ("rho", "rho")):
            if key in config:
                kwargs[arg] = config[key]
        self._env = CrystalEnv(episode, calculator, **kwargs)
        n_flat = self._env.max_sites * self._env.n_node_features \
            + self._env.n_global_features
        self.action_space = compat.Discrete(self._env.n_actions)
        self.observation_space = compat.Box(-np.inf, np.inf, (n_flat,))

    @staticmethod
    def _info(features, extra=None) -> dict:
        info = {"graph": {
            "node_features": features.node_features,
            "edge_src": features.edge_src,
            "edge_dst": features.edge_dst,
            "edge_shifts": features.edge_shifts,
            "edge_features": features.edge_features,
            "global_features": features.global_features,
            "focus": features.focus,
        }}
        if extra:
            info.update(extra)
        return info

    def reset(self, *, seed=None, options=None):
        if seed is not None:
            self._env.rng = np.random.default_rng(seed)
        features = self._env.reset()
        return features.flat(), self._info(features)

    def step(self, action):
        result = self._env.step(int(action))
        obs = result.observation.flat()
        info = self._info(result.observation)
        if result.done:
            info.update({
                "property_value": result.info.get("property_value"),
                "failure_reason": result.info.get("failure_reason"),
                "success": result.info.get("success"),
                "composition": result.info.get("composition"),
                "structure": result.info.get("structure"),
            })
        return obs, result.reward, result.done, False, info

    def close(self):
        self._env.close()

    @property
    def native(self) -> CrystalEnv:
        """Underlying primary-component environment."""
        return self._env


def make_env(config: dict) -> CrystalGymEnv:
    """Construct a bound environment from a config mapping."""
    return CrystalGymEnv(**config)
