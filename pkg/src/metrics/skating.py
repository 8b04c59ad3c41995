# Foot Skating
# 每帧取两只脚速度的较小值，按帧平均（或求和），单位 cm/s

from typing import Literal

import numpy as np

from common.errors import InvalidLengthError
from kinematics.forward_kinematics import forward_kinematics
from kinematics.skeleton import Skeleton


def foot_speeds(positions, foot_joints, fps: float) -> np.ndarray:
    """
    脚关节速度 (F-1, 2)，单位 m/s
    """
    positions = np.asarray(positions, dtype=np.float64)
    if positions.shape[0] < 2:
        raise InvalidLengthError(f"skating needs at least 2 frames, got {positions.shape[0]}")
    feet = positions[:, list(foot_joints)]
    return np.linalg.norm(np.diff(feet, axis=0), axis=-1) * fps


def skating_from_positions(positions, foot_joints, fps: float, mode: Literal['mean', 'sum'] = 'mean') -> float:
    per_frame = foot_speeds(positions, foot_joints, fps).min(axis=1) * 100.0
    return float(per_frame.sum() if mode == 'sum' else per_frame.mean())


def skating(sequence, skeleton: Skeleton, fps: float = None, mode: Literal['mean', 'sum'] = 'mean') -> float:
    """
    滑步指标

    Args:
        sequence: MotionSequence 或 (F, 225) 姿态序列
        skeleton: 骨架
        fps: 帧率（默认取序列的 fps）
        mode: 'mean' 为逐帧平均，'sum' 为逐帧求和

    Returns:
        cm/s
    """
    params = sequence.params if hasattr(sequence, 'params') else np.asarray(sequence, dtype=np.float64)
    fps = fps if fps is not None else getattr(sequence, 'fps', 30.0)
    feet = skeleton.indices(['left_foot', 'right_foot'])
    return skating_from_positions(forward_kinematics(skeleton, params), feet, fps, mode)
