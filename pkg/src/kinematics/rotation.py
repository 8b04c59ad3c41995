# Rotation Representations
# 6D 连续旋转表示与旋转矩阵之间的转换，以及常用的旋转构造工具

import numpy as np

from common.errors import DegenerateRotationError, DataValidationError

DEGENERACY_EPS = 1e-12
ORTHONORMAL_TOL = 1e-6


def rot6d_to_matrix(v):
    """
    6D 向量转换为旋转矩阵（Gram-Schmidt 正交化 + 叉乘）

    6D 向量由旋转矩阵的前两列组成：v = [c1, c2]。

    Args:
        v: 形状 (..., 6) 的数组

    Returns:
        形状 (..., 3, 3) 的旋转矩阵

    Raises:
        DegenerateRotationError: 第一列为零向量或两列平行
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != 6:
        raise DataValidationError(f"6D rotation must have last dimension 6, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DegenerateRotationError("6D rotation contains non-finite values")

    a1, a2 = v[..., :3], v[..., 3:]
    n1 = np.linalg.norm(a1, axis=-1, keepdims=True)
    if np.any(n1 < DEGENERACY_EPS):
        raise DegenerateRotationError("6D rotation has a zero first column")
    b1 = a1 / n1

    b2 = a2 - np.sum(b1 * a2, axis=-1, keepdims=True) * b1
    n2 = np.linalg.norm(b2, axis=-1, keepdims=True)
    scale = np.maximum(1.0, np.linalg.norm(a2, axis=-1, keepdims=True))
    if np.any(n2 < DEGENERACY_EPS * scale):
        raise DegenerateRotationError("6D rotation columns are parallel or the second column is zero")
    b2 = b2 / n2
    b3 = np.cross(b1, b2)

    return np.stack([b1, b2, b3], axis=-1)


def matrix_to_rot6d(R, check=True):
    """
    旋转矩阵转换为 6D 向量（取前两列）

    Args:
        R: 形状 (..., 3, 3) 的旋转矩阵
        check: 是否检查正交性

    Returns:
        形状 (..., 6) 的数组
    """
    R = np.asarray(R, dtype=np.float64)
    if R.shape[-2:] != (3, 3):
        raise DataValidationError(f"rotation matrix must be 3x3, got shape {R.shape}")
    if check:
        gram = np.swapaxes(R, -1, -2) @ R
        if not np.allclose(gram, np.eye(3), atol=ORTHONORMAL_TOL) or \
                np.any(np.abs(np.linalg.det(R) - 1.0) > ORTHONORMAL_TOL):
            raise DataValidationError("rotation matrix is not orthonormal within 1e-6")
    return np.concatenate([R[..., :, 0], R[..., :, 1]], axis=-1)


def orthonormalize_rot6d(v):
    """
    解码再编码，使 6D 向量成为标准正交形式
    """
    return matrix_to_rot6d(rot6d_to_matrix(v), check=False)


def axis_angle_matrix(axis, angle):
    """
    Rodrigues 公式：绕单位轴旋转 angle 弧度

    Args:
        axis: 形状 (3,) 的旋转轴（内部会归一化）
        angle: 旋转角（弧度）

    Returns:
        3x3 旋转矩阵
    """
    axis = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(axis)
    if norm < DEGENERACY_EPS or angle == 0.0:
        return np.eye(3)
    x, y, z = axis / norm
    K = np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0]
    ])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rotation_between(u, v, fallback_axis=None, eps=1e-12):
    """
    计算把方向 u 转到方向 v 的最小旋转

    Args:
        u: 起始向量
        v: 目标向量
        fallback_axis: u 与 v 反向时使用的旋转轴
        eps: 角度阈值，小于该值时返回单位阵

    Returns:
        3x3 旋转矩阵
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < DEGENERACY_EPS or nv < DEGENERACY_EPS:
        return np.eye(3)
    u, v = u / nu, v / nv
    axis = np.cross(u, v)
    sin_a = np.linalg.norm(axis)
    cos_a = float(np.clip(np.dot(u, v), -1.0, 1.0))
    angle = np.arctan2(sin_a, cos_a)
    if angle < eps:
        return np.eye(3)
    if sin_a < DEGENERACY_EPS:
        # 反向：绕任意垂直轴转 pi
        if fallback_axis is None or np.linalg.norm(np.cross(fallback_axis, u)) < DEGENERACY_EPS:
            fallback_axis = np.cross(u, [1.0, 0.0, 0.0])
            if np.linalg.norm(fallback_axis) < 1e-6:
                fallback_axis = np.cross(u, [0.0, 1.0, 0.0])
        axis = np.asarray(fallback_axis, dtype=np.float64)
        axis = axis - np.dot(axis, u) * u
    return axis_angle_matrix(axis, angle)


def angle_between(u, v):
    """
    两向量夹角（弧度），使用 atan2 保证小角度精度
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), np.dot(u, v)))
