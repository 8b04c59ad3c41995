# Common Package

from .errors import (
    GraspMotionError,
    ConfigurationError,
    DataValidationError,
    DegenerateRotationError,
    InvalidLengthError,
    MetricUndefinedError,
    NumericalError,
    TrainingDivergenceError,
    EnergyDivergenceError,
    exit_code_for
)

__all__ = [
    'GraspMotionError',
    'ConfigurationError',
    'DataValidationError',
    'DegenerateRotationError',
    'InvalidLengthError',
    'MetricUndefinedError',
    'NumericalError',
    'TrainingDivergenceError',
    'EnergyDivergenceError',
    'exit_code_for'
]
