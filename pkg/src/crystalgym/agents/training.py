"""Episode-driven training loop shared by all algorithms."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..env import CrystalEnv
from ..errors import ConfigError
from ..nn import save_checkpoint
from .config import AgentConfig
from .dqn import DQNAgent, RainbowAgent
from .ppo import PPOAgent
from .reinforce import ReinforceAgent
from .replay import Transition
from .sac import SACAgent

AGENT_CLASSES = {
    "dqn": DQNAgent,
    "rainbow": RainbowAgent,
    "ppo": PPOAgent,
    "sac": SACAgent,
    "reinforce": ReinforceAgent,
}

LOG_COLUMNS = ("episode", "structure", "composition", "property", "reward",
               "exploration", "loss", "steps", "wall_time")


def make_agent(env: CrystalEnv, config: AgentConfig, seed: int):
    cls = AGENT_CLASSES.get(config.algorithm)
    if cls is None:
        raise ConfigError(f"unknown algorithm {config.algorithm!r}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    return cls(env.n_actions, env.n_node_features, env.n_global_features,
               config, rng)


@dataclass
class TrainResult:
    records: list = field(default_factory=list)
    agent: object = None
    checkpoint_path: object = None

    def rewards(self) -> np.ndarray:
        return np.array([r["reward"] for r in self.records])


def _format_record(rec: dict) -> str:
    prop = "FAIL" if rec["property"] is None else f"{rec['property']:.8g}"
    loss = "" if rec["loss"] is None else f"{rec['loss']:.8g}"
    return (f"{rec['episode']},{rec['structure']},{rec['composition']},{prop},"
            f"{rec['reward']:.8g},{rec['exploration']:.6g},{loss},"
            f"{rec['steps']},{rec['wall_time']:.4g}")


def train(env: CrystalEnv, config: AgentConfig, episodes: int, seed: int,
          log_path=None, checkpoint_path=None, stop_fn=None,
          agent=None) -> TrainResult:
    """Run the collect/update loop for `episodes` episodes.

    Fully reproducible per seed; emits one log record per episode and a
    final checkpoint. `stop_fn(records)` may end training early.
    """
    if agent is None:
        agent = make_agent(env, config, seed)
    result = TrainResult(agent=agent)
    log_file = open(log_path, "w", encoding="utf-8") if log_path else None
    if log_file:
        log_file.write(",".join(LOG_COLUMNS) + "\n")
    try:
        for episode in range(episodes):
            agent.start_episode(episode, episodes)
            start = time.perf_counter()
            obs = env.reset()
            losses = []
            steps = 0
            info = {}
            reward = 0.0
            done = False
            while not done:
                action = agent.act(obs)
                step = env.step(action)
                steps += 1
                transition = Transition(obs, action, step.reward,
                                        step.observation, step.done)
                diag = agent.observe(transition)
                if diag.get("loss") is not None:
                    losses.append(diag["loss"])
                obs = step.observation
                done = step.done
                if done:
                    reward = step.reward
                    info = step.info
            diag = agent.end_episode()
            if diag.get("loss") is not None:
                losses.append(diag["loss"])
            record = {
                "episode": episode,
                "structure": info.get("structure", ""),
                "composition": "-".join(info.get("composition", ())),
                "property": info.get("property_value"),
                "reward": reward,
                "exploration": agent.exploration_level(),
                "loss": float(np.mean(losses)) if losses else None,
                "steps": steps,
                "wall_time": time.perf_counter() - start,
            }
            result.records.append(record)
            if log_file:
                log_file.write(_format_record(record) + "\n")
            if stop_fn is not None and stop_fn(result.records):
                break
    finally:
        if log_file:
            log_file.close()
    if checkpoint_path is not None:
        configs, groups = agent.checkpoint_groups()
        meta = {"algorithm": config.algorithm, "agent_config": config.to_dict(),
                "episodes_trained": len(result.records), "seed": seed}
        save_checkpoint(checkpoint_path, configs, groups, meta)
        result.checkpoint_path = checkpoint_path
    return result


def trailing_mean(records, window: int = 100) -> float:
    if not records:
        return float("nan")
    rewards = [r["reward"] for r in records[-window:]]
    return float(np.mean(rewards))
