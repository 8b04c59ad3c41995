# Motion Sequence
# 动作序列容器、线性插值初始化与扩展帧 Z = [X, J]

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from common.errors import DataValidationError, InvalidLengthError
from kinematics.forward_kinematics import forward_kinematics
from kinematics.pose import POSE_DIM, Pose, vector_to_matrices
from kinematics.skeleton import NUM_JOINTS, Skeleton

EXTENDED_DIM = POSE_DIM + 3 * NUM_JOINTS


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=np.float64)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class MotionSequence:
    """
    动作序列 F = [X_0 ... X_T]

    Attributes:
        params: (T+1, 225) 姿态参数
        fps: 帧率
        contact_probs: 可选，(T+1, 2) 左/右脚触地概率
    """
    params: np.ndarray
    fps: float = 30.0
    contact_probs: Optional[np.ndarray] = None

    def __post_init__(self):
        params = _frozen(self.params)
        if params.ndim != 2 or params.shape[1] != POSE_DIM:
            raise DataValidationError(f"motion params must have shape (frames, {POSE_DIM}), got {params.shape}")
        if params.shape[0] < 2:
            raise InvalidLengthError(f"motion sequence needs at least 2 frames, got {params.shape[0]}")
        if not np.all(np.isfinite(params)):
            raise DataValidationError("motion params contain non-finite values")
        if not self.fps > 0:
            raise DataValidationError(f"fps must be positive, got {self.fps}")
        # 校验每个 6D 块可解码
        vector_to_matrices(params)
        object.__setattr__(self, 'params', params)
        object.__setattr__(self, 'fps', float(self.fps))
        if self.contact_probs is not None:
            contact = _frozen(self.contact_probs)
            if contact.shape != (params.shape[0], 2):
                raise DataValidationError(
                    f"contact_probs must have shape ({params.shape[0]}, 2), got {contact.shape}"
                )
            if np.any(contact < 0) or np.any(contact > 1):
                raise DataValidationError("contact probabilities must lie in [0, 1]")
            object.__setattr__(self, 'contact_probs', contact)

    @property
    def num_frames(self) -> int:
        return int(self.params.shape[0])

    @property
    def frames(self) -> List[Pose]:
        return [Pose.from_vector(x) for x in self.params]

    @classmethod
    def from_frames(cls, frames: List[Pose], fps: float = 30.0, contact_probs=None) -> 'MotionSequence':
        return cls(np.stack([frame.to_vector() for frame in frames]), fps, contact_probs)

    def with_params(self, params) -> 'MotionSequence':
        return MotionSequence(params, self.fps, self.contact_probs)

    def with_contacts(self, contact_probs) -> 'MotionSequence':
        return MotionSequence(self.params, self.fps, contact_probs)

    def joint_positions(self, skeleton: Skeleton) -> np.ndarray:
        """所有帧的关节位置 (T+1, 37, 3)"""
        return forward_kinematics(skeleton, self.params)


@dataclass(frozen=True, eq=False)
class ExtendedFrame:
    """
    网络输入帧：Z = [X, J] (336 维) 与标志 m（0 表示给定端点，1 表示插值帧）
    """
    z: np.ndarray
    m: float

    def __post_init__(self):
        z = _frozen(self.z)
        if z.shape != (EXTENDED_DIM,):
            raise DataValidationError(f"extended frame must have dimension {EXTENDED_DIM}, got {z.shape}")
        if self.m not in (0, 1):
            raise DataValidationError(f"flag m must be 0 or 1, got {self.m}")
        object.__setattr__(self, 'z', z)
        object.__setattr__(self, 'm', float(self.m))

    @property
    def x(self) -> np.ndarray:
        return self.z[:POSE_DIM]

    @property
    def joints(self) -> np.ndarray:
        return self.z[POSE_DIM:].reshape(NUM_JOINTS, 3)

    def token(self) -> np.ndarray:
        """[Z, m]，337 维"""
        return np.concatenate([self.z, [self.m]])


def extend_with_joints(skeleton: Skeleton, pose) -> np.ndarray:
    """
    拼接姿态参数与正向运动学关节位置：Z = [X, J]

    Args:
        skeleton: 骨架
        pose: Pose 或 225 维姿态向量

    Returns:
        336 维向量
    """
    x = pose.to_vector() if hasattr(pose, 'to_vector') else np.asarray(pose, dtype=np.float64)
    joints = forward_kinematics(skeleton, x)
    return np.concatenate([x, joints.reshape(-1)])


def seed_interpolation(z_start, z_end, T: int) -> List[ExtendedFrame]:
    """
    从 Z_0 到 Z_T 的逐分量线性插值（6D 块不重新正交化）

    Args:
        z_start: 初始帧 Z_0 (336,)
        z_end: 目标帧 Z_T (336,)
        T: 序列长度（帧数为 T+1）

    Returns:
        T+1 个 ExtendedFrame，端点 m = 0，内部 m = 1
    """
    if T < 1:
        raise InvalidLengthError(f"sequence length T must be at least 1, got {T}")
    z_start = np.asarray(z_start, dtype=np.float64)
    z_end = np.asarray(z_end, dtype=np.float64)
    for name, z in (('Z_0', z_start), ('Z_T', z_end)):
        if z.shape != (EXTENDED_DIM,):
            raise DataValidationError(f"{name} must have dimension {EXTENDED_DIM}, got {z.shape}")

    frames = []
    delta = z_end - z_start
    for i in range(T + 1):
        if i == 0:
            z, m = z_start, 0
        elif i == T:
            z, m = z_end, 0
        else:
            z, m = z_start + (i / T) * delta, 1
        frames.append(ExtendedFrame(z, m))
    return frames


def stack_tokens(frames: List[ExtendedFrame]) -> np.ndarray:
    """
    ExtendedFrame 列表 -> (T+1, 337) 的输入矩阵
    """
    return np.stack([frame.token() for frame in frames])


def seed_sequence(skeleton: Skeleton, start, target, T: int) -> List[ExtendedFrame]:
    """
    由初始姿态和目标姿态构造插值初始序列
    """
    return seed_interpolation(extend_with_joints(skeleton, start), extend_with_joints(skeleton, target), T)


def frames_to_sequence(frames: List[ExtendedFrame], fps: float = 30.0) -> MotionSequence:
    """
    取扩展帧中的 X 块组成动作序列
    """
    return MotionSequence(np.stack([frame.x for frame in frames]), fps)
