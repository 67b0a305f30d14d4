"""Crystal-composition MDP with pluggable property calculators and RL agents."""

__version__ = "0.1.0"

from . import kernels
from .actions import ActionSpace, action_space, custom_action_space
from .elements import Element, element, element_table
from .env import (CrystalEnv, EpisodeConfig, StepResult, benchmark_targets,
                  reward_band_gap, reward_bulk_modulus, reward_density)
from .featurize import GraphFeatures, build_graph, featurize, gaussian_edge_feature
from .pool import load_pool, load_structure
from .state import CrystalState
from .structure import (Lattice, Structure, parse_structure_file,
                        periodic_distance, serialize_structure, write_structure_file)

__all__ = [
    "kernels", "ActionSpace", "action_space", "custom_action_space", "Element",
    "element", "element_table", "CrystalEnv", "EpisodeConfig", "StepResult",
    "benchmark_targets", "reward_band_gap", "reward_bulk_modulus", "reward_density",
    "GraphFeatures", "build_graph", "featurize", "gaussian_edge_feature",
    "load_pool", "load_structure", "CrystalState", "Lattice", "Structure",
    "parse_structure_file", "periodic_distance", "serialize_structure",
    "write_structure_file",
]
