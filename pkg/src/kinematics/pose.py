# Pose Parameterization
# 全身姿态 X = [t, phi, theta_b, theta_r]，共 225 维

from dataclasses import dataclass

import numpy as np

from common.errors import DataValidationError
from .rotation import rot6d_to_matrix, matrix_to_rot6d

NUM_BODY_ROTATIONS = 21
NUM_HAND_ROTATIONS = 15
NUM_ROTATIONS = 1 + NUM_BODY_ROTATIONS + NUM_HAND_ROTATIONS
POSE_DIM = 3 + 6 * NUM_ROTATIONS

T_SLICE = slice(0, 3)
PHI_SLICE = slice(3, 9)
BODY_SLICE = slice(9, 9 + 6 * NUM_BODY_ROTATIONS)
HAND_SLICE = slice(9 + 6 * NUM_BODY_ROTATIONS, POSE_DIM)
ROT_SLICE = slice(3, POSE_DIM)

IDENTITY_6D = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])


def rotation_slice(joint: int) -> slice:
    """
    关节 joint 的 6D 旋转在 225 维姿态向量中的位置（关节 0 即全局朝向 phi）
    """
    start = 3 + 6 * joint
    return slice(start, start + 6)


@dataclass(frozen=True, eq=False)
class Pose:
    """
    单帧姿态

    Attributes:
        t: 根节点平移 (3,)
        phi: 全局朝向 6D (6,)
        theta_b: 身体 21 个关节的 6D 旋转 (21, 6)
        theta_r: 右手 15 个关节的 6D 旋转 (15, 6)
    """
    t: np.ndarray
    phi: np.ndarray
    theta_b: np.ndarray
    theta_r: np.ndarray

    def __post_init__(self):
        shapes = {'t': (3,), 'phi': (6,), 'theta_b': (NUM_BODY_ROTATIONS, 6), 'theta_r': (NUM_HAND_ROTATIONS, 6)}
        for name, shape in shapes.items():
            value = np.array(getattr(self, name), dtype=np.float64)
            if value.shape != shape:
                raise DataValidationError(f"pose field {name} must have shape {shape}, got {value.shape}")
            value.flags.writeable = False
            object.__setattr__(self, name, value)

    @classmethod
    def from_vector(cls, x) -> 'Pose':
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (POSE_DIM,):
            raise DataValidationError(f"pose vector must have dimension {POSE_DIM}, got {x.shape}")
        return cls(
            t=x[T_SLICE],
            phi=x[PHI_SLICE],
            theta_b=x[BODY_SLICE].reshape(NUM_BODY_ROTATIONS, 6),
            theta_r=x[HAND_SLICE].reshape(NUM_HAND_ROTATIONS, 6)
        )

    @classmethod
    def identity(cls, t=(0.0, 0.0, 0.0)) -> 'Pose':
        return cls.from_vector(identity_vector(t))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.t, self.phi, self.theta_b.ravel(), self.theta_r.ravel()])

    def rotations6d(self) -> np.ndarray:
        """全部 37 个关节的 6D 旋转，形状 (37, 6)"""
        return np.concatenate([self.phi[None], self.theta_b, self.theta_r], axis=0)


def identity_vector(t=(0.0, 0.0, 0.0)) -> np.ndarray:
    """
    单位姿态的 225 维向量
    """
    x = np.concatenate([np.asarray(t, dtype=np.float64), np.tile(IDENTITY_6D, NUM_ROTATIONS)])
    return x


def vector_to_matrices(x) -> np.ndarray:
    """
    (..., 225) 姿态向量转换为 (..., 37, 3, 3) 局部旋转矩阵
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != POSE_DIM:
        raise DataValidationError(f"pose vector must have dimension {POSE_DIM}, got {x.shape[-1]}")
    return rot6d_to_matrix(x[..., ROT_SLICE].reshape(x.shape[:-1] + (NUM_ROTATIONS, 6)))


def matrices_to_vector(t, matrices) -> np.ndarray:
    """
    由平移和 (..., 37, 3, 3) 局部旋转矩阵拼出姿态向量
    """
    rot6d = matrix_to_rot6d(matrices, check=False)
    t = np.asarray(t, dtype=np.float64)
    return np.concatenate([t, rot6d.reshape(rot6d.shape[:-2] + (6 * NUM_ROTATIONS,))], axis=-1)
