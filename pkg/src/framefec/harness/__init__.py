from .config import ConfigError, ExperimentConfig, LinkSpec, MODES, config_from_dict, load_config
from .experiments import compare_modes, emit_overhead_report, run_batch, run_experiment
from .runner import RunResult, simulate
