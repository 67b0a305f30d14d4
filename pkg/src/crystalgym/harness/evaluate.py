"""Policy evaluation rollouts, aggregates, and the uniqueness metric."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..agents import AgentConfig, make_agent
from ..nn import load_checkpoint
from .experiment import ExperimentSpec


def reduced_composition(composition) -> str:
    """Element counts divided by their gcd, formatted sym-sorted (e.g. Cl1Na1)."""
    counts: dict[str, int] = {}
    for sym in composition:
        counts[sym] = counts.get(sym, 0) + 1
    g = math.gcd(*counts.values())
    return "".join(f"{sym}{n // g}" for sym, n in sorted(counts.items()))


@dataclass
class RolloutResult:
    composition: tuple
    reduced: str
    property_value: float | None
    reward: float
    success: bool
    structure: str


@dataclass
class EvalReport:
    rollouts: list = field(default_factory=list)
    mean_property: float | None = None
    std_property: float | None = None
    failures: int = 0
    uniqueness: float = 0.0

    def finalize(self) -> "EvalReport":
        values = [r.property_value for r in self.rollouts if r.success]
        self.failures = sum(1 for r in self.rollouts if not r.success)
        if values:
            self.mean_property = float(np.mean(values))
            self.std_property = float(np.std(values))
        if self.rollouts:
            distinct = {r.reduced for r in self.rollouts}
            self.uniqueness = len(distinct) / len(self.rollouts)
        return self

    def to_dict(self) -> dict:
        return {
            "rollouts": [vars(r) for r in self.rollouts],
            "mean_property": self.mean_property,
            "std_property": self.std_property,
            "failures": self.failures,
            "uniqueness": self.uniqueness,
        }


def evaluate(checkpoint_path, spec: ExperimentSpec, rollouts: int,
             seed: int = 12345) -> EvalReport:
    """Roll the trained policy out with randomized traversal order.

    Mixed-structure specs evaluate on the held-out list only. Value-based
    agents act greedily, policy-based agents sample.
    """
    from pathlib import Path
    configs, groups, meta = load_checkpoint(checkpoint_path)
    agent_config = AgentConfig.from_dict(meta["agent_config"])
    env = spec.build_env(seed, eval_mode=True,
                         workdir=Path(checkpoint_path).parent / "qe_eval")
    agent = make_agent(env, agent_config, seed)
    agent.load_groups(configs, groups)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))

    report = EvalReport()
    for _ in range(rollouts):
        obs = env.reset()
        done = False
        while not done:
            action = agent.rollout_action(obs, rng)
            step = env.step(action)
            obs = step.observation
            done = step.done
        info = step.info
        report.rollouts.append(RolloutResult(
            composition=info["composition"],
            reduced=reduced_composition(info["composition"]),
            property_value=info["property_value"],
            reward=step.reward,
            success=info["success"],
            structure=info["structure"],
        ))
    env.close()
    return report.finalize()


def random_baseline(spec: ExperimentSpec, episodes: int, seed: int = 54321) -> float:
    """Mean terminal reward of a uniform random policy (the null model)."""
    env = spec.build_env(seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 3]))
    total = 0.0
    for _ in range(episodes):
        env.reset()
        done = False
        while not done:
            step = env.step(int(rng.integers(env.n_actions)))
            done = step.done
        total += step.reward
    env.close()
    return total / episodes
