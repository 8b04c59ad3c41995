# Predictors Package

from .motion_predictor import GeneratorOutput, MotionPredictor, generate

__all__ = ['GeneratorOutput', 'MotionPredictor', 'generate']
