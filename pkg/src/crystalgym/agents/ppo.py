"""PPO with separate policy and value networks over the graph encoder."""

from __future__ import annotations

import numpy as np

from ..nn import Adam, init_params, zero_grads
from .base import (Agent, batch_values, build_network_config, policy_entropy,
                   policy_logits, sample_categorical)
from .config import AgentConfig
from .losses import gae_advantages, ppo_loss


class PPOAgent(Agent):
    algorithm = "ppo"

    def __init__(self, n_actions: int, node_features: int, global_features: int,
                 config: AgentConfig, rng):
        self.config = config
        self.rng = rng
        self.n_actions = n_actions
        self.policy_config = build_network_config(n_actions, node_features,
                                                  global_features, config)
        self.value_config = build_network_config(n_actions, node_features,
                                                 global_features, config, output=1)
        self.policy_params = init_params(self.policy_config, rng)
        self.value_params = init_params(self.value_config, rng)
        self.policy_opt = Adam(self.policy_params, lr=config.ppo_lr)
        self.value_opt = Adam(self.value_params, lr=config.ppo_lr)
        self._episode: list = []
        self._rollout: list = []
        self._entropies: list[float] = []

    def exploration_level(self) -> float:
        return float(np.mean(self._entropies)) if self._entropies else 0.0

    def act(self, obs) -> int:
        logits = policy_logits(self.policy_params, self.policy_config, obs)
        self._entropies.append(policy_entropy(logits))
        if len(self._entropies) > 256:
            del self._entropies[:128]
        action, logp = sample_categorical(logits, self.rng)
        self._last_logp = logp
        return action

    def rollout_action(self, obs, rng) -> int:
        logits = policy_logits(self.policy_params, self.policy_config, obs)
        action, _ = sample_categorical(logits, rng)
        return action

    def observe(self, transition) -> dict:
        self._episode.append((transition, self._last_logp))
        return {}

    def end_episode(self) -> dict:
        self._rollout.append(self._episode)
        self._episode = []
        if len(self._rollout) < self.config.rollout_episodes:
            return {}
        return self._update()

    def _update(self) -> dict:
        c = self.config
        obs, actions, old_logps, advantages, returns = [], [], [], [], []
        for episode in self._rollout:
            transitions = [t for t, _ in episode]
            e_obs = [t.obs for t in transitions]
            values = batch_values(self.value_params, self.value_config, e_obs)[:, 0]
            next_values = np.zeros(len(transitions))
            if len(transitions) > 1:
                nv = batch_values(self.value_params, self.value_config,
                                  [t.next_obs for t in transitions[:-1]])[:, 0]
                next_values[:-1] = nv
            rewards = np.array([t.reward for t in transitions])
            dones = np.array([t.done for t in transitions], dtype=np.float64)
            adv = gae_advantages(rewards, values, next_values, dones,
                                 c.gamma, c.gae_lambda)
            obs.extend(e_obs)
            actions.extend(t.action for t in transitions)
            old_logps.extend(lp for _, lp in episode)
            advantages.extend(adv)
            returns.extend(adv + values)
        self._rollout = []

        advantages = np.array(advantages)
        advantages = (advantages - advantages.mean()) / max(advantages.std(), 1e-8)
        actions = np.array(actions, dtype=np.int64)
        old_logps = np.array(old_logps)
        returns = np.array(returns)

        n = len(obs)
        last = {}
        for _ in range(c.ppo_epochs):
            order = self.rng.permutation(n)
            for chunk in np.array_split(order, c.minibatches):
                if len(chunk) == 0:
                    continue
                mb_obs = [obs[i] for i in chunk]
                zero_grads(self.policy_params)
                zero_grads(self.value_params)
                total, pol, val, ent = ppo_loss(
                    self.policy_params, self.value_params, self.policy_config,
                    self.value_config, mb_obs, actions[chunk], old_logps[chunk],
                    advantages[chunk], returns[chunk], c.clip_eps, c.value_coef,
                    c.entropy_coef)
                total.backward()
                self.policy_opt.step()
                self.value_opt.step()
                last = {"loss": float(total.data), "policy_loss": float(pol.data),
                        "value_loss": float(val.data), "entropy": float(ent.data)}
        return last

    def checkpoint_groups(self):
        return ({"policy": self.policy_config, "value": self.value_config},
                {"policy": self.policy_params, "value": self.value_params})

    def load_groups(self, configs, groups) -> None:
        from ..nn import require_config
        require_config(configs["policy"], self.policy_config, "policy")
        require_config(configs["value"], self.value_config, "value")
        self.policy_params = groups["policy"]
        self.value_params = groups["value"]
        self.policy_opt = Adam(self.policy_params, lr=self.config.ppo_lr)
        self.value_opt = Adam(self.value_params, lr=self.config.ppo_lr)
