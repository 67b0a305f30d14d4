"""DQN and Rainbow (double + dueling + prioritized replay) agents."""

from __future__ import annotations

import numpy as np

from ..nn import Adam, copy_params, init_params, zero_grads
from .base import Agent, build_network_config, batch_values
from .config import AgentConfig
from .losses import dqn_target, epsilon_greedy, rainbow_target, td_loss
from .replay import PrioritizedReplayBuffer, ReplayBuffer, Transition


class DQNAgent(Agent):
    algorithm = "dqn"
    double = False
    dueling = False
    prioritized = False

    def __init__(self, n_actions: int, node_features: int, global_features: int,
                 config: AgentConfig, rng):
        self.config = config
        self.rng = rng
        self.n_actions = n_actions
        self.net_config = build_network_config(n_actions, node_features,
                                               global_features, config,
                                               dueling=self.dueling)
        self.params = init_params(self.net_config, rng)
        self.target_params = copy_params(self.params)
        self.optimizer = Adam(self.params, lr=config.lr)
        if self.prioritized:
            self.buffer = PrioritizedReplayBuffer(config.buffer_capacity, rng,
                                                  alpha=config.per_alpha,
                                                  eps=config.per_eps)
        else:
            self.buffer = ReplayBuffer(config.buffer_capacity, rng)
        self.epsilon = config.epsilon_start
        self.beta = config.per_beta_start
        self.env_steps = 0
        self.grad_steps = 0

    def start_episode(self, episode_index: int, total_episodes: int) -> None:
        c = self.config
        frac = min(1.0, episode_index / max(1, c.epsilon_decay_episodes))
        self.epsilon = c.epsilon_start + frac * (c.epsilon_end - c.epsilon_start)
        anneal = episode_index / max(1, total_episodes)
        self.beta = c.per_beta_start + min(1.0, anneal) * (c.per_beta_end - c.per_beta_start)

    def exploration_level(self) -> float:
        return self.epsilon

    def _q(self, obs) -> np.ndarray:
        return batch_values(self.params, self.net_config, [obs])[0]

    def act(self, obs) -> int:
        # draw the exploration coin first so random steps skip the forward pass
        if self.rng.random() < self.epsilon:
            return int(self.rng.integers(self.n_actions))
        return epsilon_greedy(self._q(obs), 0.0, self.rng)

    def rollout_action(self, obs, rng) -> int:
        return int(np.argmax(self._q(obs)))

    def observe(self, transition: Transition) -> dict:
        self.buffer.push(transition)
        self.env_steps += 1
        c = self.config
        if len(self.buffer) < max(c.batch_size, c.min_buffer):
            return {}
        if self.env_steps % c.update_every != 0:
            return {}
        return self._update()

    def _targets(self, batch) -> np.ndarray:
        if self.double:
            return rainbow_target(batch, self.params, self.target_params,
                                  self.net_config, self.config.gamma)
        return dqn_target(batch, self.params, self.target_params,
                          self.net_config, self.config.gamma)

    def _update(self) -> dict:
        c = self.config
        if self.prioritized:
            batch, idx, weights = self.buffer.sample(c.batch_size, beta=self.beta)
        else:
            batch, idx, weights = self.buffer.sample(c.batch_size)
        targets = self._targets(batch)
        zero_grads(self.params)
        loss, td_errors = td_loss(self.params, self.net_config, batch, targets,
                                  weights if self.prioritized else None)
        loss.backward()
        self.optimizer.step()
        self.buffer.update_priorities(idx, td_errors)
        self.grad_steps += 1
        if self.grad_steps % c.target_update_interval == 0:
            self.target_params = copy_params(self.params)
        return {"loss": float(loss.data)}

    def checkpoint_groups(self):
        return {"q": self.net_config}, {"q": self.params}

    def load_groups(self, configs, groups) -> None:
        from ..nn import require_config
        require_config(configs["q"], self.net_config, "q")
        self.params = groups["q"]
        self.target_params = copy_params(self.params)
        self.optimizer = Adam(self.params, lr=self.config.lr)


class RainbowAgent(DQNAgent):
    algorithm = "rainbow"
    double = True
    dueling = True
    prioritized = True
