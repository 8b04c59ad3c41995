# Differentiable Kinematics
# 基于 TensorFlow 的可微正向运动学，用于训练损失、手部能量与雅可比计算

from typing import Optional, Sequence

import numpy as np
import tensorflow as tf

from common.errors import DataValidationError
from .pose import POSE_DIM, NUM_ROTATIONS
from .skeleton import FINGER_NAMES, Skeleton, finger_joint_indices, hand_joint_indices


def tf_rot6d_to_matrix(x):
    """
    6D 向量 -> 旋转矩阵（按列排列：b1, b2, b3）

    Args:
        x: 形状 (..., 6) 的张量

    Returns:
        形状 (..., 3, 3) 的张量
    """
    a1, a2 = x[..., :3], x[..., 3:]
    b1 = tf.math.l2_normalize(a1, axis=-1)
    b2 = a2 - tf.reduce_sum(b1 * a2, axis=-1, keepdims=True) * b1
    b2 = tf.math.l2_normalize(b2, axis=-1)
    b3 = tf.linalg.cross(b1, b2)
    return tf.stack([b1, b2, b3], axis=-1)


def tf_global_transforms(params, offsets, parents: Sequence[int]):
    """
    可微正向运动学

    Args:
        params: (..., 225) 姿态张量
        offsets: (36, 3) 或 (..., 36, 3) 骨骼偏移（骨长 · 静止方向），可按样本变化
        parents: 父关节索引

    Returns:
        (rotations, positions)：(..., 37, 3, 3) 与 (..., 37, 3)
    """
    params = tf.convert_to_tensor(params)
    offsets = tf.cast(tf.convert_to_tensor(offsets), params.dtype)
    batch_shape = tf.shape(params)[:-1]
    rot6d = tf.reshape(params[..., 3:], tf.concat([batch_shape, [NUM_ROTATIONS, 6]], axis=0))
    local = tf_rot6d_to_matrix(rot6d)

    rotations = [local[..., 0, :, :]]
    positions = [params[..., :3]]
    for j in range(1, len(parents)):
        p = parents[j]
        rotations.append(tf.matmul(rotations[p], local[..., j, :, :]))
        offset = offsets[..., j - 1, :]
        offset = tf.broadcast_to(offset, tf.shape(positions[p]))
        positions.append(positions[p] + tf.linalg.matvec(rotations[p], offset))
    return tf.stack(rotations, axis=-3), tf.stack(positions, axis=-2)


def tf_forward_kinematics(params, offsets, parents: Sequence[int]):
    return tf_global_transforms(params, offsets, parents)[1]


def tf_wrist_local_fingers(rotations, positions, wrist: int, fingers: Sequence[int]):
    """
    手指关节在右手腕坐标系下的位置 (..., 15, 3)
    """
    rel = tf.gather(positions, fingers, axis=-2) - positions[..., wrist:wrist + 1, :]
    wrist_rot = rotations[..., wrist, :, :]
    return tf.einsum('...ji,...kj->...ki', wrist_rot, rel)


def tf_surface_points(local_points, local_normals, owners, rotations, positions):
    """
    手部表面点与法向的世界坐标

    Returns:
        (points, normals)：(..., N, 3)
    """
    owner_rot = tf.gather(rotations, owners, axis=-3)
    points = tf.einsum('...nij,nj->...ni', owner_rot, tf.cast(local_points, rotations.dtype))
    points = points + tf.gather(positions, owners, axis=-2)
    normals = tf.einsum('...nij,nj->...ni', owner_rot, tf.cast(local_normals, rotations.dtype))
    return points, normals


def tf_finger_keypoints(skeleton: Skeleton, rotations, positions):
    """
    每个手指 7 个关键点 (..., 5, 7, 3)
    """
    result = []
    for finger in FINGER_NAMES:
        joints = finger_joint_indices(skeleton, finger)
        distal = joints[2]
        local_tip = skeleton.hand.tip_lengths[finger] * skeleton.rest_dirs[distal - 1]
        tip = positions[..., distal, :] + tf.linalg.matvec(
            rotations[..., distal, :, :],
            tf.broadcast_to(tf.constant(local_tip, dtype=rotations.dtype), tf.shape(positions[..., distal, :]))
        )
        chain = tf.concat([tf.gather(positions, joints, axis=-2), tip[..., None, :]], axis=-2)
        mids = 0.5 * (chain[..., :-1, :] + chain[..., 1:, :])
        result.append(tf.concat([chain[..., :3, :], mids, tip[..., None, :]], axis=-2))
    return tf.stack(result, axis=-3)


def fk_jacobian(skeleton: Skeleton, pose, joint_subset: Sequence[int],
                param_subset: Optional[Sequence[int]] = None) -> np.ndarray:
    """
    关节世界位置对姿态参数的解析导数（自动微分，float64）

    Args:
        skeleton: 骨架
        pose: Pose 或 225 维姿态向量
        joint_subset: 需要求导的关节索引
        param_subset: 需要的姿态参数索引（默认全部 225 个）

    Returns:
        形状 (3 * len(joint_subset), len(param_subset)) 的雅可比矩阵，行按 (关节, 坐标) 展开
    """
    params = pose.to_vector() if hasattr(pose, 'to_vector') else np.asarray(pose, dtype=np.float64)
    if params.shape != (POSE_DIM,):
        raise DataValidationError(f"fk_jacobian expects a single pose of dimension {POSE_DIM}")
    x = tf.Variable(params, dtype=tf.float64)
    with tf.GradientTape() as tape:
        positions = tf_forward_kinematics(x, skeleton.offsets, skeleton.parents)
        selected = tf.reshape(tf.gather(positions, list(joint_subset), axis=0), [-1])
    jacobian = tape.jacobian(selected, x).numpy()
    if param_subset is not None:
        jacobian = jacobian[:, list(param_subset)]
    return jacobian


def skeleton_constants(skeleton: Skeleton):
    """
    可微计算常用的骨架常量
    """
    return {
        'offsets': skeleton.offsets,
        'parents': skeleton.parents,
        'wrist': skeleton.joint_index('right_wrist'),
        'fingers': hand_joint_indices(skeleton)
    }
