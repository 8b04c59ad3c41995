# Configuration

from .pipeline_config import (
    LossWeights,
    GeneratorSettings,
    FootRefineSettings,
    HandRefineSettings,
    MetricsSettings,
    SynthSettings,
    RuntimeSettings,
    PipelineConfig,
    config_from_dict,
    load_config,
    save_config
)

__all__ = [
    'LossWeights',
    'GeneratorSettings',
    'FootRefineSettings',
    'HandRefineSettings',
    'MetricsSettings',
    'SynthSettings',
    'RuntimeSettings',
    'PipelineConfig',
    'config_from_dict',
    'load_config',
    'save_config'
]
