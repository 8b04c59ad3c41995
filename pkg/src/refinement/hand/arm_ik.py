# Arm IK Follow
# 肩-肘-腕两骨骼 IK，使手臂跟随修正后的手腕位置

import logging
from typing import Optional

import numpy as np

from kinematics.forward_kinematics import global_transforms
from kinematics.pose import rotation_slice
from kinematics.rotation import matrix_to_rot6d
from kinematics.skeleton import Skeleton
from refinement.ik.two_bone_ik import IKChain, apply_chain_deltas, solve_two_bone

logger = logging.getLogger(__name__)


def right_arm_chain(skeleton: Skeleton) -> IKChain:
    shoulder, elbow, wrist = skeleton.indices(['right_shoulder', 'right_elbow', 'right_wrist'])
    chain = IKChain(base=shoulder, mid=elbow, end=wrist)
    chain.validate(skeleton)
    return chain


def arm_ik_follow(skeleton: Skeleton, params, corrected_wrists, frames: Optional[np.ndarray] = None,
                  keep_hand_orientation: bool = True) -> np.ndarray:
    """
    逐帧用两骨骼 IK 把右手腕移动到修正位置（弯曲平面为当前肩-肘-腕平面）

    Args:
        skeleton: 骨架
        params: (N, 225) 姿态序列
        corrected_wrists: (N, 3) 修正后的手腕位置
        frames: 需要处理的帧掩码或索引（默认全部）
        keep_hand_orientation: 是否调整腕关节局部旋转以保持手的世界朝向

    Returns:
        新的 (N, 225) 姿态序列
    """
    params = np.asarray(params, dtype=np.float64)
    corrected_wrists = np.asarray(corrected_wrists, dtype=np.float64)
    chain = right_arm_chain(skeleton)
    out = params.copy()
    if frames is None:
        indices = np.arange(params.shape[0])
    else:
        frames = np.asarray(frames)
        indices = np.flatnonzero(frames) if frames.dtype == bool else frames

    rotations, positions = global_transforms(skeleton, params)
    clamped = 0
    for i in indices:
        target = corrected_wrists[i]
        if np.array_equal(target, positions[i, chain.end]):
            continue
        solution = solve_two_bone(positions[i, chain.base], positions[i, chain.mid], positions[i, chain.end], target)
        clamped += int(solution.clamped)
        if solution.is_identity:
            continue
        row = apply_chain_deltas(skeleton, params[i], rotations[i], chain, solution.base_delta, solution.mid_delta)
        if keep_hand_orientation:
            # 新的肘部全局旋转 = D_base D_mid R_elbow
            elbow_rot = solution.base_delta @ solution.mid_delta @ rotations[i, chain.mid]
            wrist_local = elbow_rot.T @ rotations[i, chain.end]
            row[rotation_slice(chain.end)] = matrix_to_rot6d(wrist_local, check=False)
        out[i] = row
    if clamped:
        logger.warning(f"{clamped} wrist targets clamped to arm reach")
    return out
