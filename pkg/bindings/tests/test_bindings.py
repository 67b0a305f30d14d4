import numpy as np
import pytest

import crystalgym_bindings as cb
from crystalgym.actions import action_space
from crystalgym.calculators import DensityCalculator, MockBandGapCalculator
from crystalgym.env import CrystalEnv, EpisodeConfig
from crystalgym.errors import ConfigError, EpisodeDoneError
from crystalgym.pool import load_structure

BASE_CONFIG = {"property": "density", "target": 3.0, "structures": "rocksalt",
               "seed": 11}


def native_env(seed=11, prop="density", target=3.0, structures=("rocksalt",),
               mode="completion", traversal="fixed"):
    pool = [load_structure(n) for n in structures]
    cfg = EpisodeConfig(prop=prop, target=target, pool=pool,
                        action_space=action_space("small"), mode=mode,
                        traversal=traversal, seed=seed)
    calc = DensityCalculator() if prop == "density" else MockBandGapCalculator()
    return CrystalEnv(cfg, calc)


def test_make_env_sizes():
    env = cb.make_env(BASE_CONFIG)
    assert env.action_space.n == 18
    env_medium = cb.make_env({**BASE_CONFIG, "action_space": "medium"})
    assert env_medium.action_space.n == 30
    obs, _ = env.reset()
    assert env.observation_space.contains(obs)
    assert obs.shape == (8 * 19 + 8 + 8,)


def test_missing_property_named_in_error():
    with pytest.raises(ConfigError, match="property"):
        cb.make_env({"target": 3.0})


def test_unknown_key_named_in_error():
    with pytest.raises(ConfigError, match="tarfet"):
        cb.make_env({"property": "density", "target": 3.0, "tarfet": 1})


def test_registration_roundtrip():
    env = cb.compat.make(cb.ENV_ID, **BASE_CONFIG)
    assert isinstance(env, cb.CrystalGymEnv)
    obs, info = env.reset()
    assert obs.shape == env.observation_space.shape
    assert "graph" in info


def test_parity_with_native_interface():
    """100 random episodes: identical rewards and flattened observations."""
    rng = np.random.default_rng(0)
    episodes = 100
    scenarios = [
        dict(prop="density", target=3.0, structures=("rocksalt", "perovskite"),
             mode="completion", traversal="random"),
        dict(prop="band_gap", target=1.12, structures=("cu3au",),
             mode="substitution", traversal="fixed"),
    ]
    action_script = rng.integers(0, 18, size=20_000)
    for scenario in scenarios:
        native = native_env(seed=42, **scenario)
        bound = cb.make_env({
            "property": scenario["prop"], "target": scenario["target"],
            "structures": list(scenario["structures"]), "mode": scenario["mode"],
            "traversal": scenario["traversal"], "seed": 42,
            "calculator": "exact" if scenario["prop"] == "density" else "mock",
        })
        k = 0
        for _ in range(episodes // len(scenarios)):
            n_obs = native.reset()
            b_obs, _ = bound.reset()
            np.testing.assert_array_equal(n_obs.flat(), b_obs)
            done = False
            while not done:
                action = int(action_script[k % len(action_script)])
                k += 1
                n_step = native.step(action)
                b_obs, b_reward, b_term, b_trunc, b_info = bound.step(action)
                assert n_step.reward == b_reward
                assert n_step.done == b_term
                assert not b_trunc
                np.testing.assert_array_equal(n_step.observation.flat(), b_obs)
                done = b_term
            assert b_info["property_value"] == n_step.info["property_value"]
            assert b_info["composition"] == n_step.info["composition"]


def test_step_after_done_raises():
    env = cb.make_env(BASE_CONFIG)
    env.reset()
    done = False
    while not done:
        _, _, done, _, _ = env.step(0)
    with pytest.raises(EpisodeDoneError):
        env.step(0)


def test_terminal_info_contents():
    env = cb.make_env({**BASE_CONFIG, "calculator": "exact"})
    env.reset()
    done = False
    while not done:
        obs, reward, done, _, info = env.step(5)
    assert info["success"] is True
    assert info["property_value"] > 0
    assert info["failure_reason"] is None
    assert len(info["composition"]) == 8


def test_reset_seed_reproducibility():
    env = cb.make_env({**BASE_CONFIG, "traversal": "random",
                       "mode": "substitution"})
    obs1, _ = env.reset(seed=99)
    obs2, _ = env.reset(seed=99)
    np.testing.assert_array_equal(obs1, obs2)


def test_action_space_sampling_contained():
    env = cb.make_env(BASE_CONFIG)
    if hasattr(env.action_space, "seed"):
        env.action_space.seed(0)
    for _ in range(25):
        assert env.action_space.contains(env.action_space.sample())


def test_graph_info_matches_observation():
    env = cb.make_env(BASE_CONFIG)
    obs, info = env.reset()
    graph = info["graph"]
    n = len(graph["node_features"])
    width = graph["node_features"].shape[1]
    np.testing.assert_array_equal(obs[: n * width],
                                  graph["node_features"].ravel())
