"""Graph construction and feature tensors for the network."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .actions import ActionSpace
from .errors import ActionSpaceError, DomainError
from .properties import TARGET_SCALE, check_property
from .state import EMPTY, CrystalState
from .structure import Structure

DEFAULT_CUTOFF = 6.0  # Angstrom
DEFAULT_SHIFT_RANGE = 1
DEFAULT_RHO = 4.0  # Angstrom^2

FLAT_FORMAT_VERSION = "flat-v1"


@dataclass(frozen=True)
class EdgeSet:
    """Directed edges (src -> dst under an integer cell shift) with distances."""
    src: np.ndarray  # (E,) int64
    dst: np.ndarray  # (E,) int64
    shifts: np.ndarray  # (E, 3) int64
    dists: np.ndarray  # (E,) float64

    def __len__(self) -> int:
        return len(self.src)

    @property
    def empty(self) -> bool:
        return len(self.src) == 0


def build_graph(structure: Structure, cutoff: float = DEFAULT_CUTOFF,
                shift_range: int = DEFAULT_SHIFT_RANGE) -> EdgeSet:
    """Enumerate ordered periodic-image pairs with 0 < d <= cutoff.

    Shift components range over [-shift_range, shift_range]; self-pairs
    appear only with a nonzero shift. Edge order is (u, v, shift lex).
    """
    if cutoff <= 0:
        raise DomainError(f"cutoff must be positive, got {cutoff}")
    if shift_range < 1:
        raise DomainError(f"shift_range must be >= 1, got {shift_range}")
    src, dst, shifts, dists = kernels.neighbor_pairs(
        structure.sites, structure.lattice.matrix, cutoff, shift_range)
    return EdgeSet(src, dst, shifts, dists)


def gaussian_edge_feature(d, rho: float = DEFAULT_RHO):
    """t = exp(-d^2 / rho), in (0, 1]; equals 1 iff d = 0."""
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    return np.exp(-np.square(d) / rho)


@dataclass(frozen=True)
class GraphFeatures:
    """Network input: one-hot nodes, gaussian edges, global scalars."""
    node_features: np.ndarray  # (n, n_actions + 1); last column flags empty sites
    edge_src: np.ndarray  # (E,) int64
    edge_dst: np.ndarray  # (E,) int64
    edge_shifts: np.ndarray  # (E, 3) int64
    edge_features: np.ndarray  # (E,) float64, gaussian distances
    global_features: np.ndarray  # [a, b, c, angles/180, S/230, target/scale, focus one-hot]
    focus: int | None
    n_actions: int

    @property
    def n_nodes(self) -> int:
        return len(self.node_features)

    @property
    def max_sites(self) -> int:
        return len(self.global_features) - 8

    def flat(self) -> np.ndarray:
        """Fixed-width vector: node one-hots padded to max_sites rows
        (row-major), then the global feature block. Format FLAT_FORMAT_VERSION."""
        n, w = self.node_features.shape
        padded = np.zeros((self.max_sites, w))
        padded[:n] = self.node_features
        return np.concatenate([padded.ravel(), self.global_features])


def featurize(state: CrystalState, space: ActionSpace, target: float, prop: str,
              max_sites: int | None = None, edges: EdgeSet | None = None,
              cutoff: float = DEFAULT_CUTOFF, shift_range: int = DEFAULT_SHIFT_RANGE,
              rho: float = DEFAULT_RHO) -> GraphFeatures:
    """Assemble the full feature set for one state.

    `edges` can be precomputed per structure (geometry never changes within
    an episode); otherwise they are built here.
    """
    check_property(prop)
    n = state.n_sites
    n_actions = len(space)
    h = np.zeros((n, n_actions + 1))
    for i, occ in enumerate(state.occupancy):
        if occ is EMPTY:
            h[i, n_actions] = 1.0
        else:
            if occ not in space:
                raise ActionSpaceError(f"site {i} holds {occ!r}, outside action space {space.id!r}")
            h[i, space.index(occ)] = 1.0

    if edges is None:
        edges = build_graph(state.structure, cutoff=cutoff, shift_range=shift_range)
    t = gaussian_edge_feature(edges.dists, rho)

    if max_sites is None:
        max_sites = n
    if max_sites < n:
        raise DomainError(f"max_sites {max_sites} smaller than site count {n}")
    a, b, c = state.structure.lattice.lengths
    p1, p2, p3 = state.structure.lattice.angles
    focus_onehot = np.zeros(max_sites)
    if state.focus is not None:
        focus_onehot[state.focus] = 1.0
    y = np.concatenate([
        [a, b, c, p1 / 180.0, p2 / 180.0, p3 / 180.0,
         state.structure.space_group / 230.0, target / TARGET_SCALE[prop]],
        focus_onehot,
    ])
    return GraphFeatures(node_features=h, edge_src=edges.src, edge_dst=edges.dst,
                         edge_shifts=edges.shifts, edge_features=t,
                         global_features=y, focus=state.focus, n_actions=n_actions)
