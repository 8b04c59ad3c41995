# AI Models Package

from .motion_transformer import EncoderLayer, MotionTransformer, TOKEN_DIM, positional_encoding
from .motion_generator import MotionGenerator

__all__ = [
    'EncoderLayer',
    'MotionTransformer',
    'TOKEN_DIM',
    'positional_encoding',
    'MotionGenerator'
]
