"""Discrete soft actor-critic with twin Q networks and exact expectations."""

from __future__ import annotations

import math

import numpy as np

from ..nn import Adam, copy_params, init_params, zero_grads
from .base import (Agent, build_network_config, policy_entropy, policy_logits,
                   sample_categorical)
from .config import AgentConfig
from .losses import sac_losses
from .replay import ReplayBuffer, Transition


class SACAgent(Agent):
    algorithm = "sac"

    def __init__(self, n_actions: int, node_features: int, global_features: int,
                 config: AgentConfig, rng):
        self.config = config
        self.rng = rng
        self.n_actions = n_actions
        self.policy_config = build_network_config(n_actions, node_features,
                                                  global_features, config)
        self.q_config = build_network_config(n_actions, node_features,
                                             global_features, config)
        self.policy_params = init_params(self.policy_config, rng)
        self.q1_params = init_params(self.q_config, rng)
        self.q2_params = init_params(self.q_config, rng)
        self.q1_target = copy_params(self.q1_params)
        self.q2_target = copy_params(self.q2_params)
        self.policy_opt = Adam(self.policy_params, lr=config.lr)
        self.q1_opt = Adam(self.q1_params, lr=config.lr)
        self.q2_opt = Adam(self.q2_params, lr=config.lr)
        self.buffer = ReplayBuffer(config.buffer_capacity, rng)
        self.log_alpha = math.log(config.sac_alpha)
        self.target_entropy = config.sac_target_entropy_scale * math.log(n_actions)
        self.env_steps = 0
        self._entropies: list[float] = []

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)

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

    def observe(self, transition: Transition) -> dict:
        self.buffer.push(transition)
        self.env_steps += 1
        c = self.config
        if len(self.buffer) < max(c.batch_size, c.min_buffer):
            return {}
        if self.env_steps % c.update_every != 0:
            return {}
        return self._update()

    def _soft_update(self, target: dict, online: dict) -> None:
        tau = self.config.sac_tau
        for key, tensor in target.items():
            tensor.data = tau * online[key].data + (1.0 - tau) * tensor.data

    def _update(self) -> dict:
        c = self.config
        batch, _, _ = self.buffer.sample(c.batch_size)
        zero_grads(self.policy_params)
        zero_grads(self.q1_params)
        zero_grads(self.q2_params)
        policy_loss, q1_loss, q2_loss, alpha_grad, entropy = sac_losses(
            batch, self.policy_params, self.q1_params, self.q2_params,
            self.q1_target, self.q2_target, self.q_config, c.gamma,
            self.alpha, self.target_entropy)
        q1_loss.backward()
        self.q1_opt.step()
        q2_loss.backward()
        self.q2_opt.step()
        policy_loss.backward()
        self.policy_opt.step()
        if c.sac_auto_alpha:
            self.log_alpha -= c.sac_alpha_lr * alpha_grad
        self._soft_update(self.q1_target, self.q1_params)
        self._soft_update(self.q2_target, self.q2_params)
        return {"loss": float(policy_loss.data), "q1_loss": float(q1_loss.data),
                "q2_loss": float(q2_loss.data), "alpha": self.alpha,
                "entropy": entropy}

    def checkpoint_groups(self):
        return ({"policy": self.policy_config, "q1": self.q_config, "q2": self.q_config},
                {"policy": self.policy_params, "q1": self.q1_params, "q2": self.q2_params})

    def load_groups(self, configs, groups) -> None:
        from ..nn import require_config
        require_config(configs["policy"], self.policy_config, "policy")
        self.policy_params = groups["policy"]
        self.q1_params = groups["q1"]
        self.q2_params = groups["q2"]
        self.q1_target = copy_params(self.q1_params)
        self.q2_target = copy_params(self.q2_params)
        self.policy_opt = Adam(self.policy_params, lr=self.config.lr)
        self.q1_opt = Adam(self.q1_params, lr=self.config.lr)
        self.q2_opt = Adam(self.q2_params, lr=self.config.lr)
