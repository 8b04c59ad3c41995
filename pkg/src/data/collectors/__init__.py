# Data Collectors Package

from .synthetic_collector import (
    SyntheticCollector,
    SyntheticScene,
    box_cloud,
    fibonacci_sphere,
    object_cloud,
    sphere_cloud,
    synth_corpus,
    synthesize_reach,
    training_samples
)

__all__ = [
    'SyntheticCollector',
    'SyntheticScene',
    'box_cloud',
    'fibonacci_sphere',
    'object_cloud',
    'sphere_cloud',
    'synth_corpus',
    'synthesize_reach',
    'training_samples'
]
