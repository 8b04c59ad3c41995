# Motion Package

from .filters import mean_filter3
from .sequence import (
    MotionSequence,
    ExtendedFrame,
    EXTENDED_DIM,
    extend_with_joints,
    seed_interpolation,
    seed_sequence,
    stack_tokens,
    frames_to_sequence
)

__all__ = [
    'mean_filter3',
    'MotionSequence',
    'ExtendedFrame',
    'EXTENDED_DIM',
    'extend_with_joints',
    'seed_interpolation',
    'seed_sequence',
    'stack_tokens',
    'frames_to_sequence'
]
