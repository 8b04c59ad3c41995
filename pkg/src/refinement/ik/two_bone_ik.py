# Two Bone IK
# 解析两骨骼逆运动学：余弦定理求中间关节弯曲角，再绕基关节摆动指向目标

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from common.errors import DataValidationError
from kinematics.forward_kinematics import global_transforms
from kinematics.pose import rotation_slice
from kinematics.rotation import axis_angle_matrix, matrix_to_rot6d, rotation_between
from kinematics.skeleton import Skeleton

logger = logging.getLogger(__name__)

# 距离变化小于该值视为已在目标上，不做弯曲
FIXED_POINT_EPS = 1e-12


@dataclass(frozen=True)
class IKChain:
    """
    三关节两骨骼链

    end 可以是 mid 的子孙关节（如腿部 hip-knee-foot，踝关节固定时 knee 到 foot 视为刚体）。
    """
    base: int
    mid: int
    end: int

    def validate(self, skeleton: Skeleton):
        if skeleton.parents[self.mid] != self.base:
            raise DataValidationError(
                f"IK chain joint {skeleton.joint_names[self.mid]} is not a child of {skeleton.joint_names[self.base]}"
            )
        if not skeleton.is_descendant(self.end, self.mid) or self.end == self.mid:
            raise DataValidationError(
                f"IK chain end {skeleton.joint_names[self.end]} is not below {skeleton.joint_names[self.mid]}"
            )


@dataclass(frozen=True)
class TwoBoneSolution:
    """
    两骨骼 IK 的解：世界坐标系下的旋转增量

    mid_delta 先作用于中间关节（绕中间关节），base_delta 再作用于整条链（绕基关节）。
    """
    base_delta: np.ndarray
    mid_delta: np.ndarray
    end_position: np.ndarray
    clamped: bool

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.base_delta, np.eye(3)) and np.array_equal(self.mid_delta, np.eye(3)))


def _bend_angle(u: np.ndarray, w: np.ndarray, n: np.ndarray, c: float) -> Tuple[float, bool]:
    """
    求绕 n 旋转 w 的角度 psi，使 u · R(psi) w = c

    u · R w = k0 + A cos(psi) + B sin(psi)，取 |psi| 最小的解；无解时取最接近 c 的角度。
    """
    w_par = np.dot(w, n) * n
    w_perp = w - w_par
    k0 = float(np.dot(u, w_par))
    a = float(np.dot(u, w_perp))
    b = float(np.dot(u, np.cross(n, w_perp)))
    amplitude = np.hypot(a, b)
    if amplitude < FIXED_POINT_EPS:
        return 0.0, True
    ratio = (c - k0) / amplitude
    clamped = bool(ratio > 1.0 or ratio < -1.0)
    phase = np.arctan2(b, a)
    offset = np.arccos(np.clip(ratio, -1.0, 1.0))
    candidates = [phase - offset, phase + offset]
    candidates = [np.arctan2(np.sin(psi), np.cos(psi)) for psi in candidates]
    return float(min(candidates, key=abs)), clamped


def solve_two_bone(base, mid, end, target, plane_normal: Optional[np.ndarray] = None) -> TwoBoneSolution:
    """
    解析两骨骼 IK

    中间关节绕平面法向旋转，使基关节到末端的距离等于到目标的距离（按余弦定理），
    然后绕基关节做最小旋转使末端指向目标。目标超出可达范围时链条伸直（或最大折叠）朝向目标。

    Args:
        base: 基关节位置
        mid: 中间关节位置
        end: 末端位置
        target: 目标位置
        plane_normal: 弯曲平面法向；为空时使用当前三关节所在平面

    Returns:
        TwoBoneSolution
    """
    base, mid, end, target = (np.asarray(v, dtype=np.float64) for v in (base, mid, end, target))
    u = mid - base
    w = end - mid
    l1, l2 = np.linalg.norm(u), np.linalg.norm(w)
    if l1 <= 0 or l2 <= 0:
        raise DataValidationError("two-bone IK requires positive bone lengths")

    n = np.cross(u, w) if plane_normal is None else np.asarray(plane_normal, dtype=np.float64)
    n_norm = np.linalg.norm(n)
    if n_norm < FIXED_POINT_EPS:
        # 链条伸直时没有弯曲平面，取与第一根骨骼垂直的任意方向
        n = np.cross(u, [1.0, 0.0, 0.0])
        if np.linalg.norm(n) < 1e-6 * l1:
            n = np.cross(u, [0.0, 1.0, 0.0])
        n_norm = np.linalg.norm(n)
    n = n / n_norm

    to_target = target - base
    current = np.linalg.norm(end - base)
    desired = float(np.clip(np.linalg.norm(to_target), abs(l1 - l2), l1 + l2))
    clamped = not (abs(l1 - l2) <= np.linalg.norm(to_target) <= l1 + l2)

    mid_delta = np.eye(3)
    if abs(desired - current) > FIXED_POINT_EPS:
        c = 0.5 * (desired ** 2 - l1 ** 2 - l2 ** 2)
        psi, no_solution = _bend_angle(u, w, n, c)
        clamped = clamped or no_solution
        if psi != 0.0:
            mid_delta = axis_angle_matrix(n, psi)

    bent_end = mid + mid_delta @ w
    base_delta = rotation_between(bent_end - base, to_target, fallback_axis=n)
    end_position = base + base_delta @ (bent_end - base)
    if clamped:
        logger.debug(f"Two-bone IK target clamped: distance {np.linalg.norm(to_target):.6f}, "
                     f"reach [{abs(l1 - l2):.6f}, {l1 + l2:.6f}]")
    return TwoBoneSolution(base_delta=base_delta, mid_delta=mid_delta, end_position=end_position, clamped=clamped)


def apply_chain_deltas(skeleton: Skeleton, params: np.ndarray, rotations: np.ndarray, chain: IKChain,
                       base_delta: np.ndarray, mid_delta: np.ndarray) -> np.ndarray:
    """
    把世界坐标系旋转增量写回基关节和中间关节的局部 6D 旋转

    新的全局旋转：R_base' = D_base R_base，R_mid' = D_base D_mid R_mid，
    其余关节的局部旋转不变。

    Args:
        skeleton: 骨架
        params: 单帧 225 维姿态向量
        rotations: 该帧的全局旋转 (37, 3, 3)
        chain: IK 链
        base_delta: 绕基关节的世界旋转
        mid_delta: 绕中间关节的世界旋转

    Returns:
        新的姿态向量（只有两个 6D 块可能改变）
    """
    out = np.array(params, dtype=np.float64, copy=True)
    parent = skeleton.parents[chain.base]
    parent_rot = np.eye(3) if parent < 0 else rotations[parent]
    base_rot = rotations[chain.base]
    mid_rot = rotations[chain.mid]

    if not np.array_equal(base_delta, np.eye(3)):
        out[rotation_slice(chain.base)] = matrix_to_rot6d(parent_rot.T @ base_delta @ base_rot, check=False)
    if not np.array_equal(mid_delta, np.eye(3)):
        out[rotation_slice(chain.mid)] = matrix_to_rot6d(base_rot.T @ mid_delta @ mid_rot, check=False)
    return out


def two_bone_ik(skeleton: Skeleton, pose, chain: IKChain, target,
                plane_normal: Optional[np.ndarray] = None) -> Tuple[np.ndarray, TwoBoneSolution]:
    """
    对单帧姿态求解两骨骼 IK，只修改 chain.base 与 chain.mid 的局部旋转

    Args:
        skeleton: 骨架
        pose: Pose 或 225 维姿态向量
        chain: IK 链
        target: 末端目标位置
        plane_normal: 弯曲平面法向；为空时使用当前链所在平面

    Returns:
        (新的姿态向量, 求解结果)
    """
    chain.validate(skeleton)
    params = pose.to_vector() if hasattr(pose, 'to_vector') else np.asarray(pose, dtype=np.float64)
    rotations, positions = global_transforms(skeleton, params)
    solution = solve_two_bone(
        positions[chain.base], positions[chain.mid], positions[chain.end], target, plane_normal
    )
    if solution.is_identity:
        return np.array(params, dtype=np.float64, copy=True), solution
    new_params = apply_chain_deltas(
        skeleton, params, rotations, chain, solution.base_delta, solution.mid_delta
    )
    return new_params, solution
