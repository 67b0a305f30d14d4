"""REINFORCE with KL-to-initial-policy and entropy regularization.

The advantage is the raw terminal reward of the episode; the reference
policy is a frozen copy of the initial parameters.
"""

from __future__ import annotations

import numpy as np

from ..nn import Adam, copy_params, init_params, zero_grads
from .base import (Agent, build_network_config, policy_entropy, policy_logits,
                   sample_categorical)
from .config import AgentConfig
from .losses import reinforce_loss


class ReinforceAgent(Agent):
    algorithm = "reinforce"

    def __init__(self, n_actions: int, node_features: int, global_features: int,
                 config: AgentConfig, rng):
        self.config = config
        self.rng = rng
        self.n_actions = n_actions
        self.policy_config = build_network_config(n_actions, node_features,
                                                  global_features, config)
        self.policy_params = init_params(self.policy_config, rng)
        self.reference_params = copy_params(self.policy_params)
        self.optimizer = Adam(self.policy_params, lr=config.ppo_lr)
        self._episode: list = []
        self._entropies: list[float] = []

    def exploration_level(self) -> float:
        return float(np.mean(self._entropies)) if self._entropies else 0.0

    def act(self, obs) -> int:
        logits = policy_logits(self.policy_params, self.policy_config, obs)
        self._entropies.append(policy_entropy(logits))
        if len(self._entropies) > 256:
            del self._entropies[:128]
        action, _ = sample_categorical(logits, self.rng)
        return action

    def rollout_action(self, obs, rng) -> int:
        logits = policy_logits(self.policy_params, self.policy_config, obs)
        action, _ = sample_categorical(logits, rng)
        return action

    def observe(self, transition) -> dict:
        self._episode.append(transition)
        return {}

    def end_episode(self) -> dict:
        if not self._episode:
            return {}
        episode = self._episode
        self._episode = []
        terminal_reward = episode[-1].reward
        zero_grads(self.policy_params)
        loss, kl, entropy = reinforce_loss(
            self.policy_params, self.reference_params, self.policy_config,
            [t.obs for t in episode], [t.action for t in episode],
            terminal_reward, self.config.kl_coef, self.config.entropy_coef)
        loss.backward()
        self.optimizer.step()
        return {"loss": float(loss.data), "kl": kl, "entropy": entropy}

    def checkpoint_groups(self):
        return ({"policy": self.policy_config, "reference": self.policy_config},
                {"policy": self.policy_params, "reference": self.reference_params})

    def load_groups(self, configs, groups) -> None:
        from ..nn import require_config
        require_config(configs["policy"], self.policy_config, "policy")
        self.policy_params = groups["policy"]
        self.reference_params = groups.get("reference", copy_params(self.policy_params))
        self.optimizer = Adam(self.policy_params, lr=self.config.ppo_lr)
