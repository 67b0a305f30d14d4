"""The crystal-composition MDP: episode lifecycle, modes, and rewards."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .actions import ActionSpace
from .calculators.base import Calculator
from .calculators.cache import CachedCalculator, ResultCache
from .errors import ActionError, ConfigError, EpisodeDoneError
from .featurize import (DEFAULT_CUTOFF, DEFAULT_RHO, DEFAULT_SHIFT_RANGE,
                        EdgeSet, GraphFeatures, build_graph, featurize)
from .properties import BAND_GAP, BULK_MODULUS, DENSITY, check_property
from .state import EMPTY, CrystalState

COMPLETION = "completion"
SUBSTITUTION = "substitution"

BULK_MODULUS_FLOOR = -5.0
GAP_DENSITY_FAILURE = -1.0


def reward_bulk_modulus(p: float, p_hat: float, success: bool) -> float:
    """Scaled absolute distance, clipped at -5; -5 on calculator failure."""
    if not success:
        return BULK_MODULUS_FLOOR
    return max(-abs(p - p_hat) / p_hat, BULK_MODULUS_FLOOR)


def reward_density(p: float, p_hat: float, success: bool) -> float:
    """exp(-(p - p_hat)^2 / p_hat); -1 on calculator failure."""
    if not success:
        return GAP_DENSITY_FAILURE
    return math.exp(-((p - p_hat) ** 2) / p_hat)


def reward_band_gap(p: float, p_hat: float, success: bool) -> float:
    """exp(-(p - p_hat)^2); -1 on calculator failure."""
    if not success:
        return GAP_DENSITY_FAILURE
    return math.exp(-((p - p_hat) ** 2))


REWARD_FUNCTIONS = {
    BULK_MODULUS: reward_bulk_modulus,
    DENSITY: reward_density,
    BAND_GAP: reward_band_gap,
}

EASY_TARGETS = {BULK_MODULUS: 300.0, DENSITY: 3.0, BAND_GAP: 1.12}
HARD_TARGETS = {BULK_MODULUS: 500.0, DENSITY: 5.0, BAND_GAP: 2.0}


def benchmark_targets(difficulty: str) -> dict:
    """Per-property target table for the easy and hard settings."""
    tables = {"easy": EASY_TARGETS, "hard": HARD_TARGETS}
    if difficulty not in tables:
        raise ConfigError(f"unknown difficulty {difficulty!r}; expected easy or hard")
    return dict(tables[difficulty])


def _check_reward_range(prop: str, reward: float) -> None:
    if prop == BULK_MODULUS:
        assert BULK_MODULUS_FLOOR <= reward <= 0.0, reward
    else:
        assert reward == GAP_DENSITY_FAILURE or 0.0 < reward <= 1.0, reward


@dataclass(frozen=True)
class EpisodeConfig:
    prop: str
    target: float
    pool: tuple
    action_space: ActionSpace
    mode: str = COMPLETION
    traversal: str = "fixed"  # fixed site order, or a fresh permutation per episode
    seed: int = 0

    def __post_init__(self):
        check_property(self.prop)
        if self.target <= 0:
            raise ConfigError(f"target must be positive, got {self.target}")
        if not self.pool:
            raise ConfigError("structure pool must be non-empty")
        if self.mode not in (COMPLETION, SUBSTITUTION):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.traversal not in ("fixed", "random"):
            raise ConfigError(f"unknown traversal {self.traversal!r}")
        object.__setattr__(self, "pool", tuple(self.pool))


@dataclass(frozen=True)
class StepResult:
    observation: GraphFeatures
    reward: float
    done: bool
    info: dict = field(default_factory=dict)


class CrystalEnv:
    """One agent-facing episode machine; single-threaded by design.

    Rewards are sparse: zero on every intermediate step, terminal reward from
    the configured calculator once all sites are visited.
    """

    def __init__(self, config: EpisodeConfig, calculator: Calculator,
                 cache: ResultCache | None = None, trace_path=None,
                 cutoff: float = DEFAULT_CUTOFF, shift_range: int = DEFAULT_SHIFT_RANGE,
                 rho: float = DEFAULT_RHO, max_sites: int | None = None):
        if calculator.property_id != config.prop:
            raise ConfigError(
                f"calculator computes {calculator.property_id!r}, config wants {config.prop!r}")
        self.config = config
        self.calculator = CachedCalculator(calculator, cache) if cache is not None \
            else calculator
        self.rng = np.random.default_rng(config.seed)
        pool_max = max(s.n_sites for s in config.pool)
        # padding may exceed the pool max so train/eval pools featurize alike
        if max_sites is not None and max_sites < pool_max:
            raise ConfigError(f"max_sites {max_sites} below pool maximum {pool_max}")
        self.max_sites = pool_max if max_sites is None else max_sites
        self._edges: dict[str, EdgeSet] = {
            s.name: build_graph(s, cutoff=cutoff, shift_range=shift_range)
            for s in config.pool
        }
        self._rho = rho
        self.state: CrystalState | None = None
        self._order: list[int] = []
        self._cursor = 0
        self._done = True
        self.episode_index = -1
        self._episode_start = 0.0
        self._trace_file = open(trace_path, "a", encoding="utf-8") if trace_path else None

    # -- episode lifecycle -------------------------------------------------

    def reset(self) -> GraphFeatures:
        structure = self.config.pool[int(self.rng.integers(len(self.config.pool)))]
        n = structure.n_sites
        if self.config.mode == COMPLETION:
            occupancy = (EMPTY,) * n
        else:
            elements = self.config.action_space.elements
            occupancy = tuple(elements[int(i)]
                              for i in self.rng.integers(len(elements), size=n))
        if self.config.traversal == "random":
            self._order = [int(i) for i in self.rng.permutation(n)]
        else:
            self._order = list(range(n))
        self._cursor = 0
        self._done = False
        self.episode_index += 1
        self._episode_start = time.perf_counter()
        self.state = CrystalState(structure, occupancy, focus=self._order[0], step_count=0)
        return self._observe()

    def step(self, action: int) -> StepResult:
        if self._done or self.state is None:
            raise EpisodeDoneError("episode is finished; call reset()")
        space = self.config.action_space
        if not 0 <= action < len(space):
            raise ActionError(f"action {action} outside [0, {len(space)})")
        symbol = space.elements[action]
        site = self._order[self._cursor]
        self._cursor += 1
        terminal = self._cursor >= self.state.n_sites
        new_focus = None if terminal else self._order[self._cursor]
        self.state = self.state.with_site(site, symbol, new_focus)

        if not terminal:
            return StepResult(self._observe(), 0.0, False, {})

        self._done = True
        result = self.calculator.compute(self.state.structure, self.state.occupancy)
        reward = REWARD_FUNCTIONS[self.config.prop](
            result.value if result.success else 0.0, self.config.target, result.success)
        _check_reward_range(self.config.prop, reward)
        info = {
            "success": result.success,
            "property_value": result.value,
            "failure_reason": result.failure_reason,
            "composition": self.state.occupancy,
            "structure": self.state.structure.name,
            "calculator_result": result,
            "empty_graph": self._edges[self.state.structure.name].empty,
        }
        self._write_trace(reward, result)
        return StepResult(self._observe(), reward, True, info)

    @property
    def done(self) -> bool:
        return self._done

    @property
    def n_actions(self) -> int:
        return len(self.config.action_space)

    @property
    def n_node_features(self) -> int:
        return len(self.config.action_space) + 1

    @property
    def n_global_features(self) -> int:
        return 8 + self.max_sites

    def _observe(self) -> GraphFeatures:
        return featurize(self.state, self.config.action_space, self.config.target,
                         self.config.prop, max_sites=self.max_sites,
                         edges=self._edges[self.state.structure.name], rho=self._rho)

    def _write_trace(self, reward: float, result) -> None:
        if self._trace_file is None:
            return
        wall = time.perf_counter() - self._episode_start
        value = f"{result.value:.8g}" if result.success else "FAIL"
        comp = "-".join(self.state.occupancy)
        self._trace_file.write(
            f"{self.episode_index},{self.state.structure.name},{comp},"
            f"{value},{reward:.8g},{wall:.4g}\n")
        self._trace_file.flush()

    def close(self) -> None:
        if self._trace_file is not None:
            self._trace_file.close()
            self._trace_file = None
