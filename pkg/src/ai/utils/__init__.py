# AI Utils Package

from .base_model import WEIGHTS_VERSION, BaseModel

__all__ = ['WEIGHTS_VERSION', 'BaseModel']
