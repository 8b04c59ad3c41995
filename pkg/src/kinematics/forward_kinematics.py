# Forward Kinematics
# 基于骨架的正向运动学（numpy 实现，支持批量帧）

import numpy as np

from common.errors import DataValidationError
from .pose import POSE_DIM, NUM_ROTATIONS, T_SLICE, vector_to_matrices
from .skeleton import FINGER_NAMES, Skeleton, finger_joint_indices, hand_joint_indices


def _as_params(pose) -> np.ndarray:
    if hasattr(pose, 'to_vector'):
        return pose.to_vector()
    params = np.asarray(pose, dtype=np.float64)
    if params.shape[-1] != POSE_DIM:
        raise DataValidationError(f"pose must have dimension {POSE_DIM}, got {params.shape}")
    return params


def global_transforms(skeleton: Skeleton, pose):
    """
    计算所有关节的世界旋转和世界位置

    每个关节的世界坐标系 = 父关节坐标系 ∘ 局部旋转；
    子关节位置 = 父关节位置 + 父关节累计旋转 · (骨长 · 静止方向)。

    Args:
        skeleton: 骨架
        pose: Pose 或 (..., 225) 姿态向量

    Returns:
        (rotations, positions)：形状 (..., 37, 3, 3) 与 (..., 37, 3)
    """
    if skeleton.num_joints != NUM_ROTATIONS:
        raise DataValidationError(
            f"skeleton has {skeleton.num_joints} joints but poses carry {NUM_ROTATIONS} rotations"
        )
    params = _as_params(pose)
    local = vector_to_matrices(params)
    batch = params.shape[:-1]
    offsets = skeleton.offsets

    rotations = np.empty(batch + (skeleton.num_joints, 3, 3))
    positions = np.empty(batch + (skeleton.num_joints, 3))
    rotations[..., 0, :, :] = local[..., 0, :, :]
    positions[..., 0, :] = params[..., T_SLICE]
    for j in range(1, skeleton.num_joints):
        p = skeleton.parents[j]
        parent_rot = rotations[..., p, :, :]
        rotations[..., j, :, :] = parent_rot @ local[..., j, :, :]
        positions[..., j, :] = positions[..., p, :] + parent_rot @ offsets[j - 1]
    return rotations, positions


def forward_kinematics(skeleton: Skeleton, pose) -> np.ndarray:
    """
    正向运动学：返回所有关节的世界位置

    Args:
        skeleton: 骨架
        pose: Pose 或 (..., 225) 姿态向量

    Returns:
        形状 (..., 37, 3) 的关节位置（米）
    """
    return global_transforms(skeleton, pose)[1]


def wrist_local_finger_positions(skeleton: Skeleton, pose) -> np.ndarray:
    """
    右手 15 个手指关节在右手腕坐标系下的位置

    Returns:
        形状 (..., 15, 3)
    """
    rotations, positions = global_transforms(skeleton, pose)
    wrist = skeleton.joint_index('right_wrist')
    fingers = hand_joint_indices(skeleton)
    rel = positions[..., fingers, :] - positions[..., wrist, None, :]
    wrist_rot = rotations[..., wrist, :, :]
    return np.einsum('...ji,...kj->...ki', wrist_rot, rel)


def fingertip_positions(skeleton: Skeleton, rotations: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """
    由全局变换求 5 个指尖位置（指尖沿第三节指骨方向延伸 tip_length）

    Returns:
        形状 (..., 5, 3)，手指顺序与 FINGER_NAMES 一致
    """
    tips = []
    for finger in FINGER_NAMES:
        distal = finger_joint_indices(skeleton, finger)[2]
        local_tip = skeleton.hand.tip_lengths[finger] * skeleton.rest_dirs[distal - 1]
        tips.append(positions[..., distal, :] + rotations[..., distal, :, :] @ local_tip)
    return np.stack(tips, axis=-2)
