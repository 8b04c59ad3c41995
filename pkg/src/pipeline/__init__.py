# Pipeline Package
# 端到端流水线

from .pipeline_runner import (
    STAGES,
    PipelineInput,
    PipelineRunner,
    bootstrap_generator,
    default_inputs,
    load_scene_input,
    smooth_sequence,
    stage_label
)

__all__ = [
    'STAGES',
    'PipelineInput',
    'PipelineRunner',
    'bootstrap_generator',
    'default_inputs',
    'load_scene_input',
    'smooth_sequence',
    'stage_label'
]
