# Trainers Package

from .model_trainer import ModelTrainer, set_global_determinism

__all__ = ['ModelTrainer', 'set_global_determinism']
