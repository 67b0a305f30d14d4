from .base import Agent, build_network_config
from .config import ALGORITHMS, AgentConfig
from .dqn import DQNAgent, RainbowAgent
from .losses import (dqn_target, epsilon_greedy, gae_advantages,
                     importance_weights, ppo_loss, rainbow_target,
                     reinforce_loss, sac_losses, sac_q_targets, td_loss)
from .ppo import PPOAgent
from .reinforce import ReinforceAgent
from .replay import (PrioritizedReplayBuffer, ReplayBuffer, SumTree, Transition)
from .sac import SACAgent
from .training import (AGENT_CLASSES, LOG_COLUMNS, TrainResult, make_agent,
                       trailing_mean, train)

__all__ = [
    "Agent", "build_network_config", "ALGORITHMS", "AgentConfig", "DQNAgent",
    "RainbowAgent", "PPOAgent", "ReinforceAgent", "SACAgent", "Transition",
    "ReplayBuffer", "PrioritizedReplayBuffer", "SumTree", "dqn_target",
    "rainbow_target", "td_loss", "ppo_loss", "sac_losses", "sac_q_targets",
    "reinforce_loss", "epsilon_greedy", "gae_advantages", "importance_weights",
    "train", "make_agent", "trailing_mean", "TrainResult", "AGENT_CLASSES",
    "LOG_COLUMNS",
]
