# END-MJD
# 末帧关节平均距离（身体 22 个关节、右手 15 个关节分别统计，单位毫米）

from typing import Tuple

import numpy as np

from kinematics.forward_kinematics import forward_kinematics
from kinematics.skeleton import NUM_BODY_JOINTS, Skeleton


def mean_joint_distance(joints_a, joints_b) -> Tuple[float, float]:
    """
    两组关节位置的平均距离（毫米）

    Args:
        joints_a: (..., 37, 3) 关节位置（米），多帧时对所有帧取平均
        joints_b: 与 joints_a 同形状

    Returns:
        (身体, 右手)
    """
    distances = np.linalg.norm(np.asarray(joints_a) - np.asarray(joints_b), axis=-1) * 1000.0
    return float(distances[..., :NUM_BODY_JOINTS].mean()), float(distances[..., NUM_BODY_JOINTS:].mean())


def end_mjd(generated_final, target, skeleton: Skeleton) -> Tuple[float, float]:
    """
    生成序列末帧与目标姿态之间的关节平均距离

    Args:
        generated_final: 末帧 Pose 或姿态向量
        target: 目标 Pose 或姿态向量
        skeleton: 骨架

    Returns:
        (body mm, rhand mm)
    """
    return mean_joint_distance(forward_kinematics(skeleton, generated_final), forward_kinematics(skeleton, target))
