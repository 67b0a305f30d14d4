"""Experiment specs, the six benchmark presets, and the training runner."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..actions import action_space
from ..agents import AgentConfig, train
from ..calculators import ResultCache, make_calculator
from ..env import COMPLETION, SUBSTITUTION, CrystalEnv, EpisodeConfig, benchmark_targets
from ..errors import ConfigError
from ..pool import MIXED_EVAL, MIXED_TRAIN, POOL_NAMES, load_structure
from ..properties import ALL_PROPERTIES, DENSITY

DEFAULT_CUTOFF = 4.2
DEFAULT_NETWORK = {"layers": 2, "node_embed": 16, "edge_embed": 16,
                   "global_embed": 16, "mlp_hidden": 32, "head_hidden": [32]}


@dataclass(frozen=True)
class ExperimentSpec:
    experiment_id: str
    mode: str = COMPLETION
    single_structure: str | None = "rocksalt"
    train_structures: tuple = ()
    eval_structures: tuple = ()
    difficulty: str = "easy"
    action_space_id: str = "small"
    algorithm: str = "dqn"
    prop: str = DENSITY
    calculator_id: str = "exact"
    seeds: tuple = (0, 1, 2, 3, 4)
    episodes: int = 2000
    traversal: str = "fixed"
    cutoff: float = DEFAULT_CUTOFF
    agent_overrides: dict = field(default_factory=dict)
    qe_command: str | None = None

    def __post_init__(self):
        if self.prop not in ALL_PROPERTIES:
            raise ConfigError(f"unknown property {self.prop!r}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if self.mode not in (COMPLETION, SUBSTITUTION):
            raise ConfigError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "seeds", tuple(self.seeds))
        object.__setattr__(self, "train_structures", tuple(self.train_structures))
        object.__setattr__(self, "eval_structures", tuple(self.eval_structures))
        if self.mixed:
            overlap = set(self.train_structures) & set(self.eval_structures)
            if overlap:
                raise ConfigError(f"train/eval lists overlap: {sorted(overlap)}")
        for name in self.structure_names() + list(self.eval_structures):
            if name not in POOL_NAMES:
                raise ConfigError(f"unknown structure {name!r}")

    @property
    def mixed(self) -> bool:
        return bool(self.train_structures)

    def structure_names(self) -> list:
        if self.mixed:
            return list(self.train_structures)
        if self.single_structure is None:
            raise ConfigError("either single_structure or train_structures is required")
        return [self.single_structure]

    @property
    def target(self) -> float:
        return benchmark_targets(self.difficulty)[self.prop]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        return cls(**d)

    def agent_config(self) -> AgentConfig:
        overrides = dict(self.agent_overrides)
        overrides.setdefault("network", dict(DEFAULT_NETWORK))
        return AgentConfig(algorithm=self.algorithm, **overrides)

    def build_env(self, seed: int, cache: ResultCache | None = None,
                  eval_mode: bool = False, trace_path=None,
                  workdir=None) -> CrystalEnv:
        names = list(self.eval_structures) if (eval_mode and self.mixed) \
            else self.structure_names()
        pool = [load_structure(n) for n in names]
        # pad features to the experiment's full structure set so train and
        # eval observations share one width
        all_names = self.structure_names() + list(self.eval_structures)
        max_sites = max(load_structure(n).n_sites for n in all_names)
        episode_config = EpisodeConfig(
            prop=self.prop, target=self.target, pool=pool,
            action_space=action_space(self.action_space_id), mode=self.mode,
            traversal="random" if eval_mode else self.traversal, seed=seed)
        calculator = make_calculator(self.calculator_id, self.prop,
                                     qe_command=self.qe_command, workdir=workdir)
        return CrystalEnv(episode_config, calculator, cache=cache,
                          trace_path=trace_path, cutoff=self.cutoff,
                          max_sites=max_sites)


def _preset(experiment_id, mode, mixed, difficulty, space) -> ExperimentSpec:
    kwargs = dict(experiment_id=experiment_id, mode=mode, difficulty=difficulty,
                  action_space_id=space)
    if mixed:
        kwargs.update(single_structure=None, train_structures=MIXED_TRAIN,
                      eval_structures=MIXED_EVAL)
    return ExperimentSpec(**kwargs)


PRESETS = {
    "exp1": _preset("exp1", COMPLETION, False, "easy", "small"),
    "exp2": _preset("exp2", COMPLETION, False, "hard", "small"),
    "exp3": _preset("exp3", COMPLETION, False, "hard", "medium"),
    "exp4": _preset("exp4", COMPLETION, True, "easy", "small"),
    "exp5": _preset("exp5", COMPLETION, True, "hard", "small"),
    "exp6": _preset("exp6", SUBSTITUTION, True, "easy", "small"),
}


def load_spec(source) -> ExperimentSpec:
    """Accepts a preset name or a JSON config file path."""
    if isinstance(source, str) and source in PRESETS:
        return PRESETS[source]
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"{source!r} is neither a preset ({sorted(PRESETS)}) "
                          f"nor a config file")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return ExperimentSpec.from_dict(data)


def run_experiment(spec: ExperimentSpec, run_dir, episodes: int | None = None,
                   seeds=None, stop_fn=None) -> Path:
    """Train every seed, then write a machine-readable summary.

    Resumable: seeds whose checkpoint already exists are skipped. Per-seed
    failures are recorded without aborting the other seeds.
    """
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "spec.json").write_text(json.dumps(spec.to_dict(), indent=2),
                                       encoding="utf-8")
    cache = ResultCache(run_dir / "cache.tsv")
    budget = spec.episodes if episodes is None else episodes
    seed_list = spec.seeds if seeds is None else tuple(seeds)
    summary = {"experiment": spec.experiment_id, "episodes": budget, "seeds": {}}
    for seed in seed_list:
        checkpoint = run_dir / f"seed{seed}.ckpt.npz"
        log_path = run_dir / f"seed{seed}.log.csv"
        entry = {"checkpoint": checkpoint.name, "log": log_path.name}
        if checkpoint.exists():
            entry["status"] = "skipped"
            summary["seeds"][str(seed)] = entry
            continue
        env = spec.build_env(seed, cache=cache,
                             trace_path=run_dir / f"seed{seed}.trace.csv",
                             workdir=run_dir / f"qe_seed{seed}")
        try:
            result = train(env, spec.agent_config(), budget, seed,
                           log_path=log_path, checkpoint_path=checkpoint,
                           stop_fn=stop_fn)
            entry["status"] = "done"
            entry["episodes_run"] = len(result.records)
            if result.records:
                entry["final_reward"] = result.records[-1]["reward"]
        except Exception as exc:  # keep the other seeds going
            entry["status"] = "error"
            entry["error"] = f"{type(exc).__name__}: {exc}"
        finally:
            env.close()
        summary["seeds"][str(seed)] = entry
    (run_dir / "summary.json").write_text(json.dumps(summary, indent=2),
                                          encoding="utf-8")
    return run_dir
