# Data Processors Package

from .training_processor import DataProcessor, TrainingProcessor, TrainingSample, label_contacts

__all__ = ['DataProcessor', 'TrainingProcessor', 'TrainingSample', 'label_contacts']
