# Foot Refiner
# 基于 IK 的下肢后处理：触地分组、K-A-F 平面两骨骼 IK、非触地子序列混合

import logging
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from common.errors import DataValidationError
from config.pipeline_config import FootRefineSettings
from kinematics.forward_kinematics import global_transforms
from kinematics.pose import POSE_DIM, rotation_slice
from kinematics.rotation import orthonormalize_rot6d, rotation_between
from kinematics.skeleton import Skeleton
from motion.filters import mean_filter3
from motion.sequence import MotionSequence
from refinement.ik.two_bone_ik import IKChain, apply_chain_deltas, solve_two_bone
from .contact_groups import LegChain, build_groups, contact_runs, leg_chains, threshold_contacts

logger = logging.getLogger(__name__)

PLANE_EPS = 1e-10


def _unit(v: np.ndarray) -> Optional[np.ndarray]:
    norm = np.linalg.norm(v)
    return None if norm < PLANE_EPS else v / norm


def _leg_plane_normal(hip, knee, ankle, foot) -> Optional[np.ndarray]:
    normal = _unit(np.cross(ankle - knee, foot - knee))
    if normal is None:
        logger.warning("Degenerate knee-ankle-foot plane, falling back to hip-knee-foot plane")
        normal = _unit(np.cross(knee - hip, foot - hip))
    return normal


def retarget_foot(skeleton: Skeleton, pose, leg: LegChain, target) -> Tuple[np.ndarray, bool]:
    """
    把脚关节移到目标位置，只修改髋、膝的局部旋转（踝关节固定）

    1. 以膝-踝-脚 (K-A-F) 平面为弯曲平面，把髋投影到平面上得到 H'；
    2. 把目标 T 绕过 H 的轴转到平面内得到 T'（保持 |T' - H| = |T - H|），
       在平面内对 H'-K-F 做两骨骼 IK 使脚到达 T'；
    3. 再绕 H 把整条腿从 T' 转回 T。

    Args:
        skeleton: 骨架
        pose: Pose 或 225 维姿态向量
        leg: 腿部关节链
        target: 目标脚位置 (3,)

    Returns:
        (新的姿态向量, 目标是否被截断到可达范围)
    """
    params = pose.to_vector() if hasattr(pose, 'to_vector') else np.asarray(pose, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if not np.all(np.isfinite(target)):
        raise DataValidationError("foot target must be finite")
    rotations, positions = global_transforms(skeleton, params)
    hip, knee, ankle, foot = (positions[j] for j in (leg.hip, leg.knee, leg.ankle, leg.foot))

    normal = _leg_plane_normal(hip, knee, ankle, foot)
    if normal is None:
        # 腿完全伸直且脚与小腿共线，只能在当前链平面外任取弯曲方向
        solution = solve_two_bone(hip, knee, foot, target)
        base_delta, mid_delta = solution.base_delta, solution.mid_delta
        clamped = solution.clamped
    else:
        height = float(np.dot(hip - knee, normal))
        hip_proj = hip - height * normal

        radius = np.linalg.norm(target - hip)
        in_plane = target - hip_proj
        in_plane = in_plane - np.dot(in_plane, normal) * normal
        direction = _unit(in_plane)
        if direction is None:
            direction = _unit(foot - hip_proj)
        planar_target = hip_proj + np.sqrt(max(radius ** 2 - height ** 2, 0.0)) * direction

        solution = solve_two_bone(hip_proj, knee, foot, planar_target, plane_normal=normal)
        swing = rotation_between(planar_target - hip, target - hip, fallback_axis=normal)
        base_delta = swing @ solution.base_delta
        mid_delta = solution.mid_delta
        clamped = solution.clamped or radius ** 2 < height ** 2

    chain = IKChain(base=leg.hip, mid=leg.knee, end=leg.foot)
    if np.array_equal(base_delta, np.eye(3)) and np.array_equal(mid_delta, np.eye(3)):
        return np.array(params, dtype=np.float64, copy=True), clamped
    return apply_chain_deltas(skeleton, params, rotations, chain, base_delta, mid_delta), clamped


def blend_airborne(theta_old, theta_n1, theta_nk) -> np.ndarray:
    """
    非触地子序列的混合

    先整体平移使首帧等于 theta_n1，再线性分摊末帧误差使末帧等于 theta_nk：
        θ'_i = θ_i + (θ_n1 - θ_1)
        θ_n,i = θ'_i + (i - 1) / (K - 1) · (θ_nK - θ'_K)

    Args:
        theta_old: (K, d) 已经过均值滤波的关节角子序列（首尾为相邻触地帧）
        theta_n1: 首帧修正后的角度 (d,)
        theta_nk: 末帧修正后的角度 (d,)

    Returns:
        (K, d) 修正后的子序列
    """
    theta_old = np.asarray(theta_old, dtype=np.float64)
    theta_n1 = np.asarray(theta_n1, dtype=np.float64)
    theta_nk = np.asarray(theta_nk, dtype=np.float64)
    k = theta_old.shape[0]
    if k == 1:
        return theta_n1[None].copy()
    shifted = theta_old + (theta_n1 - theta_old[0])
    ramp = (np.arange(k, dtype=np.float64) / (k - 1)).reshape((k,) + (1,) * (theta_old.ndim - 1))
    blended = shifted + ramp * (theta_nk - shifted[-1])
    # 端点精确
    blended[0] = theta_n1
    blended[-1] = theta_nk
    return blended


class FootRefiner:
    """
    下肢后处理器：两条腿分别处理，只改变髋和膝的旋转
    """

    def __init__(self, config=None):
        """
        初始化下肢后处理器

        Args:
            config: FootRefineSettings 或字典
        """
        self.logger = logging.getLogger(__name__)
        if isinstance(config, FootRefineSettings):
            self.config = config
        else:
            self.config = FootRefineSettings(**(config or {}))

    def _leg_columns(self, leg: LegChain) -> np.ndarray:
        return np.concatenate([np.arange(POSE_DIM)[rotation_slice(j)] for j in leg.refined_joints])

    def refine_leg(self, skeleton: Skeleton, params: np.ndarray, contacts: np.ndarray,
                   leg: LegChain) -> Tuple[np.ndarray, Dict[str, Any]]:
        """
        处理一条腿

        Args:
            skeleton: 骨架
            params: (N, 225) 姿态序列
            contacts: (N,) 该脚的触地标志
            leg: 腿部关节链

        Returns:
            (新的姿态序列, 统计信息)
        """
        num_frames = params.shape[0]
        foot_positions = global_transforms(skeleton, params)[1][:, leg.foot]
        groups = build_groups(contacts, foot_positions)
        stats = {'groups': len(groups), 'retargeted': 0, 'clamped': 0, 'blended_runs': 0}
        if not groups:
            return params, stats

        columns = self._leg_columns(leg)
        theta_old = params[:, columns]
        theta_new = theta_old.copy()

        out = params.copy()
        for group in groups:
            for i in group.frames:
                refined, clamped = retarget_foot(skeleton, params[i], leg, group.target)
                theta_new[i] = refined[columns]
                stats['retargeted'] += 1
                stats['clamped'] += int(clamped)

        airborne = ~np.asarray(contacts, dtype=bool)
        for start, end in contact_runs(airborne):
            lo = start - 1 if start > 0 else start
            hi = end + 1 if end < num_frames - 1 else end
            segment = theta_old[lo:hi + 1]
            if self.config.filter_airborne:
                segment = mean_filter3(segment)
            # 缺少相邻触地帧的一侧不做修正
            theta_n1 = theta_new[lo] if start > 0 else segment[0]
            theta_nk = theta_new[hi] if end < num_frames - 1 else segment[-1]
            blended = blend_airborne(segment, theta_n1, theta_nk)
            inner = slice(start - lo, start - lo + (end - start + 1))
            theta_new[start:end + 1] = blended[inner]
            stats['blended_runs'] += 1

        changed = np.any(theta_new != theta_old, axis=1)
        for i in np.flatnonzero(changed):
            row = theta_new[i].reshape(-1, 6)
            out[i, columns] = orthonormalize_rot6d(row).reshape(-1)
        return out, stats

    def refine(self, sequence: MotionSequence, skeleton: Skeleton) -> MotionSequence:
        """
        下肢后处理主流程

        Args:
            sequence: 带触地概率的动作序列
            skeleton: 骨架

        Returns:
            修正后的动作序列（非腿部参数逐位不变）
        """
        if sequence.contact_probs is None:
            raise DataValidationError("foot refinement needs contact probabilities")
        contacts = threshold_contacts(sequence.contact_probs, self.config.contact_threshold)
        params = np.array(sequence.params)
        for side_index, leg in enumerate(leg_chains(skeleton)):
            params, stats = self.refine_leg(skeleton, params, contacts[:, side_index], leg)
            self.logger.debug(f"Refined {leg.side} leg: {stats}")
            if stats['clamped']:
                self.logger.warning(f"{stats['clamped']} {leg.side} foot targets clamped to leg reach")
        return sequence.with_params(params)

    def refine_safe(self, sequence: MotionSequence, skeleton: Skeleton) -> Dict[str, Any]:
        """
        带错误捕获的后处理

        Returns:
            结果字典
        """
        try:
            refined = self.refine(sequence, skeleton)
            return {
                "success": True,
                "sequence": refined,
                "timestamp": datetime.now().isoformat()
            }
        except Exception as e:
            self.logger.error(f"Error refining feet: {str(e)}")
            return {
                "success": False,
                "error": str(e),
                "timestamp": datetime.now().isoformat()
            }


def refine_feet(sequence: MotionSequence, skeleton: Skeleton, threshold: float = 0.5) -> MotionSequence:
    """
    下肢后处理的函数入口
    """
    return FootRefiner({'contact_threshold': threshold}).refine(sequence, skeleton)
