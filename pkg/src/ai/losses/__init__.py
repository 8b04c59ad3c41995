# Losses Package
# 训练损失

from .motion_losses import (
    LOSS_COLUMNS,
    MotionLoss,
    finger_loss,
    joint_loss,
    loss_l1,
    loss_l2,
    loss_l3,
    loss_l4,
    safe_norm
)

__all__ = [
    'LOSS_COLUMNS',
    'MotionLoss',
    'finger_loss',
    'joint_loss',
    'loss_l1',
    'loss_l2',
    'loss_l3',
    'loss_l4',
    'safe_norm'
]
