# Signed Chamfer Distance
# 带符号的倒角距离：最近邻 + 参考点法向决定符号（负值表示在参考表面内部）

from typing import Tuple

import numpy as np
from sklearn.neighbors import KDTree

from common.errors import DataValidationError


def nearest_neighbors(query, reference, tree: KDTree = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    精确最近邻搜索

    Args:
        query: (N, 3) 查询点
        reference: (M, 3) 参考点
        tree: 可复用的 KDTree

    Returns:
        (distances, indices)：形状 (N,) 和 (N,)
    """
    query = np.asarray(query, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if query.shape[0] == 0 or reference.shape[0] == 0:
        raise DataValidationError("nearest-neighbour search needs non-empty point sets")
    tree = tree if tree is not None else KDTree(reference)
    distances, indices = tree.query(query, k=1)
    return distances[:, 0], indices[:, 0]


def signed_distances(query, reference, reference_normals, tree: KDTree = None) -> np.ndarray:
    """
    每个查询点到参考点集的有符号距离：sign(<q - r, n_r>) · |q - r|

    Returns:
        (N,) 有符号距离（米）
    """
    query = np.asarray(query, dtype=np.float64)
    reference_normals = np.asarray(reference_normals, dtype=np.float64)
    distances, indices = nearest_neighbors(query, reference, tree)
    offsets = query - np.asarray(reference, dtype=np.float64)[indices]
    signs = np.where(np.einsum('ij,ij->i', offsets, reference_normals[indices]) < 0, -1.0, 1.0)
    return signs * distances


def signed_chamfer(query, reference, reference_normals, tree: KDTree = None) -> Tuple[np.ndarray, float]:
    """
    单向有符号倒角距离

    Args:
        query: 查询点 (N, 3)
        reference: 参考点 (M, 3)
        reference_normals: 参考点外法向 (M, 3)
        tree: 可复用的 KDTree

    Returns:
        (每个查询点的有符号距离, 平均值)
    """
    signed = signed_distances(query, reference, reference_normals, tree)
    return signed, float(signed.mean())


def penetration_penalty(x, delta: float):
    """
    d(x) = |min(x + delta, 0)|
    """
    return np.abs(np.minimum(np.asarray(x, dtype=np.float64) + delta, 0.0))
