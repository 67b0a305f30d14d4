"""Shared agent machinery: network construction, action sampling, checkpoints."""

from __future__ import annotations

import numpy as np

from ..nn import MegnetConfig, forward, no_grad
from ..nn.megnet import GraphBatch
from .config import AgentConfig


def build_network_config(n_actions: int, node_features: int, global_features: int,
                         config: AgentConfig, output: int | None = None,
                         dueling: bool = False) -> MegnetConfig:
    overrides = dict(config.network)
    return MegnetConfig(
        n_node_features=node_features,
        n_global_features=global_features,
        output=n_actions if output is None else output,
        layers=overrides.get("layers", 3),
        node_embed=overrides.get("node_embed", 32),
        edge_embed=overrides.get("edge_embed", 32),
        global_embed=overrides.get("global_embed", 32),
        mlp_hidden=overrides.get("mlp_hidden", 64),
        head_hidden=tuple(overrides.get("head_hidden", (64,))),
        activation=overrides.get("activation", "softplus"),
        dueling=dueling,
    )


class Agent:
    """Interface the trainer drives; one subclass per algorithm."""

    algorithm: str

    def act(self, obs) -> int:
        raise NotImplementedError

    def rollout_action(self, obs, rng) -> int:
        """Evaluation-time action: greedy for value-based, sampled for policies."""
        raise NotImplementedError

    def observe(self, transition) -> dict:
        """Consume one transition; returns loss diagnostics when an update ran."""
        return {}

    def end_episode(self) -> dict:
        """Hook after each terminal step; returns loss diagnostics if updating."""
        return {}

    def start_episode(self, episode_index: int, total_episodes: int) -> None:
        pass

    def exploration_level(self) -> float:
        """Epsilon for value-based agents, mean policy entropy otherwise."""
        return 0.0

    def checkpoint_groups(self):
        """(configs dict, param-group dict) for the checkpoint writer."""
        raise NotImplementedError

    def load_groups(self, configs, groups) -> None:
        raise NotImplementedError


def sample_categorical(logits: np.ndarray, rng) -> tuple[int, float]:
    """Draw an action from row logits; returns (action, log-prob)."""
    z = logits - logits.max()
    p = np.exp(z)
    p /= p.sum()
    action = int(rng.choice(len(p), p=p))
    return action, float(np.log(p[action]))


def policy_logits(params, config, obs) -> np.ndarray:
    with no_grad():
        return forward(params, config, obs).data[0]


def policy_entropy(logits: np.ndarray) -> float:
    z = logits - logits.max()
    p = np.exp(z)
    p /= p.sum()
    logp = np.log(p)
    return float(-(p * logp).sum())


def batch_values(params, config, observations) -> np.ndarray:
    with no_grad():
        return forward(params, config, GraphBatch.from_features(list(observations))).data
