"""ACERAC: actor-critic with experience replay and autocorrelated actions."""

from ._core import (
    __version__,
    ar_noise,
    compare,
    default_config,
    evaluate_checkpoint,
    load_checkpoint,
    mlp_forward,
    read_curve,
    resolve_config,
    train,
    window_covariance,
    window_log_density,
)

__all__ = [
    "__version__",
    "ar_noise",
    "compare",
    "default_config",
    "evaluate_checkpoint",
    "load_checkpoint",
    "mlp_forward",
    "read_curve",
    "resolve_config",
    "train",
    "window_covariance",
    "window_log_density",
]
