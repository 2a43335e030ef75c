from cascadeopt.harness.config import ConfigError, RunConfig
from cascadeopt.harness.runner import RunRecord, ablation_suite, run, run_batch

__all__ = ["ConfigError", "RunConfig", "RunRecord", "ablation_suite", "run", "run_batch"]
