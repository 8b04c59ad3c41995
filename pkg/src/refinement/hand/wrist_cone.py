# Wrist Cone Constraint
# 把接近目标的手腕轨迹限制在以目标为顶点、半角 π/4 的锥内

import logging
from typing import Tuple

import numpy as np

from kinematics.rotation import angle_between, axis_angle_matrix

logger = logging.getLogger(__name__)

ZERO_EPS = 1e-12


def _perpendicular(v: np.ndarray) -> np.ndarray:
    axis = np.cross(v, [1.0, 0.0, 0.0])
    if np.linalg.norm(axis) < 1e-6 * np.linalg.norm(v):
        axis = np.cross(v, [0.0, 1.0, 0.0])
    return axis


def wrist_cone_correct(wrist_positions, target, radius: float = 0.4,
                       half_angle: float = np.pi / 4) -> Tuple[np.ndarray, np.ndarray]:
    """
    手腕锥约束

    与目标 O 距离不超过 radius 的帧都参与修正；A 为第一帧这样的手腕，
    B 为使 ∠AOB 最大的手腕。若 ∠AOB 超过 half_angle，每个手腕 D 在 OA、OD 所在平面内绕 O 旋转，
    使 ∠AOD' = ∠AOD / ∠AOB · half_angle，|OD| 保持不变。

    Args:
        wrist_positions: (N, 3) 手腕轨迹
        target: 目标位置 O
        radius: 激活距离（米）
        half_angle: 锥半角（弧度）

    Returns:
        (修正后的轨迹 (N, 3), 参与修正的帧掩码 (N,))
    """
    wrists = np.asarray(wrist_positions, dtype=np.float64)
    origin = np.asarray(target, dtype=np.float64)
    corrected = wrists.copy()
    offsets = wrists - origin
    active = np.linalg.norm(offsets, axis=1) <= radius
    if not np.any(active):
        return corrected, np.zeros(len(wrists), dtype=bool)

    frames = np.flatnonzero(active)
    oa = offsets[frames[0]]
    if np.linalg.norm(oa) < ZERO_EPS:
        # A 与 O 重合时没有参考方向
        return corrected, np.zeros(len(wrists), dtype=bool)

    angles = np.array([angle_between(oa, offsets[i]) if np.linalg.norm(offsets[i]) >= ZERO_EPS else 0.0
                       for i in frames])
    max_angle = float(angles.max())
    if max_angle <= half_angle:
        return corrected, np.zeros(len(wrists), dtype=bool)

    logger.debug(f"Wrist cone angle {max_angle:.4f} exceeds {half_angle:.4f}, correcting {len(frames)} frames")
    mask = np.zeros(len(wrists), dtype=bool)
    for i, angle in zip(frames, angles):
        od = offsets[i]
        if np.linalg.norm(od) < ZERO_EPS or angle == 0.0:
            continue
        axis = np.cross(oa, od)
        if np.linalg.norm(axis) < ZERO_EPS * np.linalg.norm(oa) * np.linalg.norm(od):
            axis = _perpendicular(oa)
        new_angle = angle / max_angle * half_angle
        corrected[i] = origin + axis_angle_matrix(axis, new_angle - angle) @ od
        mask[i] = True
    return corrected, mask
