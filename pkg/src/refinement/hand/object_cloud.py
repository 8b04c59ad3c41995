# Object Point Cloud
# 待抓取物体的有向点云（4096 个点 + 外法向）

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.neighbors import KDTree

from common.errors import DataValidationError

logger = logging.getLogger(__name__)

NUM_OBJECT_POINTS = 4096
NORMAL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ObjectCloud:
    """
    物体点云

    Attributes:
        points: (4096, 3) 位置（米）
        normals: (4096, 3) 单位外法向
    """
    points: np.ndarray
    normals: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64)
        normals = np.array(self.normals, dtype=np.float64)
        if points.shape != (NUM_OBJECT_POINTS, 3):
            raise DataValidationError(f"object cloud must have {NUM_OBJECT_POINTS} points, got {points.shape[0]}")
        if normals.shape != points.shape:
            raise DataValidationError(f"object normals must have shape {points.shape}, got {normals.shape}")
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(normals))):
            raise DataValidationError("object cloud contains non-finite values")
        norms = np.linalg.norm(normals, axis=1)
        if np.any(np.abs(norms - 1.0) > NORMAL_TOL):
            bad = int(np.argmax(np.abs(norms - 1.0)))
            raise DataValidationError(f"object normal {bad} is not unit length (norm {norms[bad]:.8f})")
        points.flags.writeable = False
        normals.flags.writeable = False
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'normals', normals)

    @property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def tree(self) -> KDTree:
        return KDTree(self.points)


def estimate_normals(points, neighbors: int = 16) -> np.ndarray:
    """
    局部平面拟合估计法向，并朝远离质心的方向定向

    Args:
        points: (N, 3) 点
        neighbors: 拟合所用的近邻数

    Returns:
        (N, 3) 单位法向
    """
    points = np.asarray(points, dtype=np.float64)
    k = min(neighbors, points.shape[0])
    if k < 3:
        raise DataValidationError("normal estimation needs at least 3 points")
    _, indices = KDTree(points).query(points, k=k)
    patches = points[indices] - points[indices].mean(axis=1, keepdims=True)
    # 协方差最小特征值对应的特征向量
    _, _, vt = np.linalg.svd(patches, full_matrices=False)
    normals = vt[:, -1, :]
    outward = points - points.mean(axis=0)
    normals = np.where(np.einsum('ij,ij->i', normals, outward)[:, None] < 0, -normals, normals)
    normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    logger.info(f"Estimated normals for {points.shape[0]} points with {k} neighbours")
    return normals
