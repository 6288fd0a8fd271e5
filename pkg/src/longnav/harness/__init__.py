from .ablation import Ablation, AblationRow, compare_ablations, load_ablations, parse_ablations
from .config import ConfigError, EpisodeConfig, format_config, load_config, parse_config_text
from .episode import EXIT_CODES, STATUSES, EpisodeLog, metrics_from_log, run_episode
from .metrics import (
    EmptyPath,
    MetricsReport,
    ZeroLength,
    compute_report,
    distance_to_target_metric,
    path_length,
    traversability_metric,
)

__all__ = [
    "Ablation",
    "AblationRow",
    "ConfigError",
    "EXIT_CODES",
    "EmptyPath",
    "EpisodeConfig",
    "EpisodeLog",
    "MetricsReport",
    "STATUSES",
    "ZeroLength",
    "compare_ablations",
    "compute_report",
    "distance_to_target_metric",
    "format_config",
    "load_ablations",
    "load_config",
    "metrics_from_log",
    "parse_ablations",
    "parse_config_text",
    "path_length",
    "run_episode",
    "traversability_metric",
]
