from .curves import emit_curves, read_log_rewards, smooth
from .evaluate import (EvalReport, RolloutResult, evaluate, random_baseline,
                       reduced_composition)
from .experiment import (PRESETS, ExperimentSpec, load_spec, run_experiment)

__all__ = ["emit_curves", "read_log_rewards", "smooth", "EvalReport",
           "RolloutResult", "evaluate", "random_baseline", "reduced_composition",
           "PRESETS", "ExperimentSpec", "load_spec", "run_experiment"]
