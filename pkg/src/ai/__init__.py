# AI Module Package
# 动作生成器：模型、损失、训练与推理

from .models import MotionGenerator, MotionTransformer
from .losses import MotionLoss, loss_l1, loss_l2, loss_l3, loss_l4
from .trainers.model_trainer import ModelTrainer
from .predictors.motion_predictor import GeneratorOutput, MotionPredictor, generate

__all__ = [
    'MotionGenerator',
    'MotionTransformer',
    'MotionLoss',
    'loss_l1',
    'loss_l2',
    'loss_l3',
    'loss_l4',
    'ModelTrainer',
    'GeneratorOutput',
    'MotionPredictor',
    'generate'
]
