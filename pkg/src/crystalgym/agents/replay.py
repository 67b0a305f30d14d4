"""Transition storage: uniform ring buffer and prioritized sum-tree variant."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..featurize import GraphFeatures


@dataclass(frozen=True)
class Transition:
    obs: GraphFeatures
    action: int
    reward: float
    next_obs: GraphFeatures
    done: bool


class ReplayBuffer:
    def __init__(self, capacity: int, rng):
        self.capacity = capacity
        self.rng = rng
        self._data: list[Transition | None] = [None] * capacity
        self._write = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, transition: Transition) -> None:
        self._data[self._write] = transition
        self._write = (self._write + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int):
        """Uniform sample; returns (transitions, indices, unit weights)."""
        idx = self.rng.integers(self._size, size=batch_size)
        return [self._data[i] for i in idx], idx, np.ones(batch_size)

    def update_priorities(self, indices, priorities) -> None:
        pass  # uniform buffer has no priorities


class SumTree:
    """Binary tree with subtree sums at internal nodes, leaves hold priorities."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.tree = np.zeros(2 * capacity - 1)

    def update(self, data_index: int, priority: float) -> None:
        idx = data_index + self.capacity - 1
        change = priority - self.tree[idx]
        self.tree[idx] = priority
        while idx != 0:
            idx = (idx - 1) // 2
            self.tree[idx] += change

    def get(self, data_index: int) -> float:
        return self.tree[data_index + self.capacity - 1]

    @property
    def total(self) -> float:
        return float(self.tree[0])

    def find(self, value: float) -> int:
        """Leaf whose cumulative-priority interval contains `value`."""
        idx = 0
        while True:
            left = 2 * idx + 1
            if left >= len(self.tree):
                return idx - (self.capacity - 1)
            if value <= self.tree[left]:
                idx = left
            else:
                value -= self.tree[left]
                idx = left + 1


class PrioritizedReplayBuffer:
    """Sampling proportional to priority^alpha with importance correction."""

    def __init__(self, capacity: int, rng, alpha: float = 0.6, eps: float = 1e-6):
        self.capacity = capacity
        self.rng = rng
        self.alpha = alpha
        self.eps = eps
        self._data: list[Transition | None] = [None] * capacity
        self._tree = SumTree(capacity)
        self._write = 0
        self._size = 0
        self._max_priority = 1.0

    def __len__(self) -> int:
        return self._size

    def push(self, transition: Transition) -> None:
        self._data[self._write] = transition
        self._tree.update(self._write, self._max_priority ** self.alpha)
        self._write = (self._write + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, beta: float = 1.0):
        """Returns (transitions, indices, importance weights normalized by max)."""
        total = self._tree.total
        points = self.rng.uniform(0.0, total, size=batch_size)
        idx = np.array([self._tree.find(p) for p in points], dtype=np.int64)
        probs = np.array([self._tree.get(i) for i in idx]) / total
        weights = (self._size * probs) ** (-beta)
        weights /= weights.max()
        return [self._data[i] for i in idx], idx, weights

    def update_priorities(self, indices, td_errors) -> None:
        for i, err in zip(indices, np.asarray(td_errors)):
            priority = abs(float(err)) + self.eps
            self._max_priority = max(self._max_priority, priority)
            self._tree.update(int(i), priority ** self.alpha)

    def probabilities(self) -> np.ndarray:
        """Current sampling distribution over stored items (diagnostics/tests)."""
        leaves = np.array([self._tree.get(i) for i in range(self._size)])
        return leaves / leaves.sum()
