"""SE(3) and multiplicative EKFs for spacecraft attitude and gyro bias."""

from .filters import (
    ALL_VARIANTS,
    ErrorState,
    FilterDivergenceError,
    FilterError,
    FilterState,
    SingularInnovationError,
    Variant,
    inject,
    measurement_model,
    predict,
    process_jacobians,
    update,
)
from .sensors import ConfigError, NoiseParams, SimConfig, MotionProfile

__all__ = [
    "ALL_VARIANTS",
    "ConfigError",
    "ErrorState",
    "FilterDivergenceError",
    "FilterError",
    "FilterState",
    "MotionProfile",
    "NoiseParams",
    "SimConfig",
    "SingularInnovationError",
    "Variant",
    "inject",
    "measurement_model",
    "predict",
    "process_jacobians",
    "update",
]

__version__ = "0.1.0"
