"""Agent hyperparameters; every default is config-exposed and sweepable."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..errors import ConfigError

ALGORITHMS = ("dqn", "rainbow", "ppo", "sac", "reinforce")


@dataclass(frozen=True)
class AgentConfig:
    algorithm: str = "dqn"
    gamma: float = 1.0
    lr: float = 1e-3

    # value-based exploration and replay
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_episodes: int = 2000
    buffer_capacity: int = 10000
    batch_size: int = 32
    min_buffer: int = 500
    target_update_interval: int = 200  # gradient steps
    update_every: int = 1  # env steps between gradient updates

    # prioritized replay (rainbow)
    per_alpha: float = 0.6
    per_beta_start: float = 0.4
    per_beta_end: float = 1.0
    per_eps: float = 1e-6

    # ppo
    clip_eps: float = 0.2
    gae_lambda: float = 0.95
    ppo_epochs: int = 4
    minibatches: int = 4
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    rollout_episodes: int = 8
    ppo_lr: float = 3e-4

    # sac
    sac_tau: float = 0.005
    sac_alpha: float = 0.2
    sac_auto_alpha: bool = True
    sac_target_entropy_scale: float = 0.98
    sac_alpha_lr: float = 3e-4

    # reinforce
    kl_coef: float = 0.05

    # network overrides passed into MegnetConfig
    network: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected {ALGORITHMS}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.clip_eps <= 0:
            raise ConfigError("clip_eps must be positive")
        for name in ("entropy_coef", "kl_coef", "value_coef"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AgentConfig":
        return cls(**d)
