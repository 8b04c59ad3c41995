# Motion Losses
# 生成器训练损失：参数损失、旋转差分损失、关节位置损失、手腕坐标系手指损失

from typing import Dict, Sequence

import tensorflow as tf

from config.pipeline_config import LossWeights
from kinematics.differentiable import tf_global_transforms, tf_wrist_local_fingers
from kinematics.pose import BODY_SLICE, HAND_SLICE, PHI_SLICE, T_SLICE

LOSS_COLUMNS = ('L1', 'L2', 'L3', 'L4', 'total')


def safe_norm(x, axis=-1, eps=1e-12):
    """
    2 范数；x = 0 时梯度有限且取值恰为 0
    """
    return tf.sqrt(tf.reduce_sum(tf.square(x), axis=axis) + eps * eps) - eps


def _abs_sum(x, axes):
    return tf.reduce_sum(tf.abs(x), axis=axes)


def _frame_diff(x):
    return x[..., 1:, :] - x[..., :-1, :]


def loss_l1(pred_params, true_params, pred_contact, true_contact, weights: LossWeights):
    """
    参数损失：各部分 1 范数加触地概率 2 范数，按帧求和、按批次平均

    Args:
        pred_params: (..., F, 225) 预测姿态
        true_params: (..., F, 225) 真值
        pred_contact: (..., F, 2) 预测触地概率
        true_contact: (..., F, 2) 触地标签
        weights: 损失权重

    Returns:
        标量
    """
    diff = pred_params - true_params
    per_frame = (
        weights.t * _abs_sum(diff[..., T_SLICE], -1)
        + weights.rg * _abs_sum(diff[..., PHI_SLICE], -1)
        + weights.rb * _abs_sum(diff[..., BODY_SLICE], -1)
        + weights.rh * _abs_sum(diff[..., HAND_SLICE], -1)
        + weights.fc * safe_norm(pred_contact - true_contact)
    )
    return tf.reduce_mean(tf.reduce_sum(per_frame, axis=-1))


def loss_l2(pred_params, true_params):
    """
    旋转参数（φ, θ_b, θ_r）帧间差分的 1 范数误差
    """
    mismatch = _frame_diff(pred_params[..., 3:]) - _frame_diff(true_params[..., 3:])
    return tf.reduce_mean(_abs_sum(mismatch, [-2, -1]))


def joint_loss(pred_joints, true_joints):
    """
    关节位置、速度、加速度误差的 1 范数之和

    Args:
        pred_joints: (..., F, J, 3)
        true_joints: (..., F, J, 3)
    """
    error = pred_joints - true_joints
    velocity = error[..., 1:, :, :] - error[..., :-1, :, :]
    acceleration = velocity[..., 1:, :, :] - velocity[..., :-1, :, :]
    axes = [-3, -2, -1]
    return tf.reduce_mean(_abs_sum(error, axes) + _abs_sum(velocity, axes) + _abs_sum(acceleration, axes))


def finger_loss(pred_local, true_local):
    """手腕坐标系下手指位置误差的 1 范数，按帧求和"""
    return tf.reduce_mean(_abs_sum(pred_local - true_local, [-3, -2, -1]))


def loss_l3(pred_params, true_params, offsets, parents: Sequence[int]):
    """
    经可微正向运动学的关节损失

    Args:
        offsets: (36, 3)，或按样本给出的 (B, 1, 36, 3)
    """
    pred_joints = tf_global_transforms(pred_params, offsets, parents)[1]
    true_joints = tf_global_transforms(true_params, offsets, parents)[1]
    return joint_loss(pred_joints, true_joints)


def loss_l4(pred_params, true_params, offsets, parents: Sequence[int], wrist: int, fingers: Sequence[int]):
    """
    右手腕坐标系下 15 个手指关节位置的误差
    """
    pred_rot, pred_pos = tf_global_transforms(pred_params, offsets, parents)
    true_rot, true_pos = tf_global_transforms(true_params, offsets, parents)
    return finger_loss(
        tf_wrist_local_fingers(pred_rot, pred_pos, wrist, fingers),
        tf_wrist_local_fingers(true_rot, true_pos, wrist, fingers)
    )


class MotionLoss:
    """
    总损失 L = L1 + ω2·L2 + ω3·L3 + ω4·L4（预测与真值各做一次正向运动学）
    """

    def __init__(self, weights: LossWeights, parents: Sequence[int], wrist: int, fingers: Sequence[int]):
        self.weights = weights
        self.parents = tuple(parents)
        self.wrist = int(wrist)
        self.fingers = list(fingers)

    def __call__(self, pred_params, pred_contact, true_params, true_contact, offsets) -> Dict[str, tf.Tensor]:
        l1 = loss_l1(pred_params, true_params, pred_contact, true_contact, self.weights)
        l2 = loss_l2(pred_params, true_params)

        pred_rot, pred_pos = tf_global_transforms(pred_params, offsets, self.parents)
        true_rot, true_pos = tf_global_transforms(true_params, offsets, self.parents)
        l3 = joint_loss(pred_pos, true_pos)
        l4 = finger_loss(
            tf_wrist_local_fingers(pred_rot, pred_pos, self.wrist, self.fingers),
            tf_wrist_local_fingers(true_rot, true_pos, self.wrist, self.fingers)
        )
        w = self.weights
        total = l1 + w.l2 * l2 + w.l3 * l3 + w.l4 * l4
        return {'L1': l1, 'L2': l2, 'L3': l3, 'L4': l4, 'total': total}
