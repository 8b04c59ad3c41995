# Voxelization
# 0.5 cm 体素化与手-物体相交体积

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from sklearn.neighbors import KDTree

logger = logging.getLogger(__name__)

VOXEL_STEP = 0.005


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """
    锚定在共享原点上的体素集合

    Attributes:
        cells: (K, 3) 被占据体素的整数索引（去重、排序）
        step: 体素边长（米）
        origin: 格点原点
    """
    cells: np.ndarray
    step: float = VOXEL_STEP
    origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int64).reshape(-1, 3)
        cells = np.unique(cells, axis=0) if len(cells) else cells
        cells.flags.writeable = False
        object.__setattr__(self, 'cells', cells)

    @property
    def count(self) -> int:
        return int(self.cells.shape[0])

    @property
    def cell_volume_cm3(self) -> float:
        return (self.step * 100.0) ** 3

    @property
    def volume_cm3(self) -> float:
        return self.count * self.cell_volume_cm3

    def centers(self) -> np.ndarray:
        return np.asarray(self.origin) + (self.cells + 0.5) * self.step

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.cells.min(axis=0), self.cells.max(axis=0)


def _keys(cells: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(cells).view(np.dtype((np.void, cells.dtype.itemsize * 3))).ravel()


def intersection_count(a: VoxelGrid, b: VoxelGrid) -> int:
    if a.count == 0 or b.count == 0:
        return 0
    return int(np.intersect1d(_keys(a.cells), _keys(b.cells)).size)


def intersection_volume(a: VoxelGrid, b: VoxelGrid) -> float:
    """两组体素的相交体积（cm³）"""
    return intersection_count(a, b) * a.cell_volume_cm3


def _lattice_box(lo: np.ndarray, hi: np.ndarray, step: float, pad: int):
    start = np.floor(lo / step).astype(np.int64) - pad
    stop = np.floor(hi / step).astype(np.int64) + pad + 1
    axes = [np.arange(s, e) for s, e in zip(start, stop)]
    grid = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)
    return start, grid


def voxelize(points, normals=None, step: float = VOXEL_STEP, solid: bool = True) -> VoxelGrid:
    """
    点集体素化

    表面壳层为中心到最近采样点不超过半个体对角线的体素；实体时从包围盒外部做泛洪填充，
    有法向时壳层体素只保留中心位于表面内侧的那些。

    Args:
        points: (N, 3) 表面采样点
        normals: (N, 3) 外法向（可选）
        step: 体素边长（米）
        solid: 是否填充内部

    Returns:
        VoxelGrid
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if points.shape[0] == 0:
        return VoxelGrid(np.zeros((0, 3), dtype=np.int64), step)
    if not solid:
        return VoxelGrid(np.floor(points / step).astype(np.int64), step)

    start, grid = _lattice_box(points.min(axis=0), points.max(axis=0), step, pad=2)
    centers = (grid + 0.5) * step
    tree = KDTree(points)
    distances, indices = tree.query(centers.reshape(-1, 3), k=1)
    shell = (distances[:, 0] <= 0.5 * np.sqrt(3.0) * step).reshape(grid.shape[:3])
    filled = ndimage.binary_fill_holes(shell)

    if normals is not None:
        normals = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
        nearest = indices[:, 0]
        offsets = centers.reshape(-1, 3) - points[nearest]
        inside = (np.einsum('ij,ij->i', offsets, normals[nearest]) < 0).reshape(shell.shape)
        occupied = (filled & ~shell) | (shell & inside)
    else:
        occupied = filled
    return VoxelGrid(grid[occupied], step)


def _segment_distances(centers: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = max(float(np.dot(ab, ab)), 1e-30)
    s = np.clip((centers - a) @ ab / denom, 0.0, 1.0)
    return np.linalg.norm(centers - (a + s[:, None] * ab), axis=1)


def voxelize_capsules(starts, ends, radii, step: float = VOXEL_STEP,
                      region: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> VoxelGrid:
    """
    胶囊体并集的解析体素化：中心落在任一胶囊内的体素

    Args:
        starts: (B, 3) 胶囊端点
        ends: (B, 3) 胶囊端点
        radii: (B,) 半径
        step: 体素边长
        region: 可选的整数体素包围盒 (lo, hi)，只在其中求解

    Returns:
        VoxelGrid
    """
    starts = np.asarray(starts, dtype=np.float64)
    ends = np.asarray(ends, dtype=np.float64)
    radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (starts.shape[0],))
    lo = np.minimum(starts, ends).min(axis=0) - radii.max()
    hi = np.maximum(starts, ends).max(axis=0) + radii.max()
    start, grid = _lattice_box(lo, hi, step, pad=1)
    if region is not None:
        keep = np.all((grid >= region[0]) & (grid <= region[1]), axis=-1)
        if not np.any(keep):
            return VoxelGrid(np.zeros((0, 3), dtype=np.int64), step)
        cells = grid[keep]
    else:
        cells = grid.reshape(-1, 3)
    centers = (cells + 0.5) * step
    occupied = np.zeros(len(cells), dtype=bool)
    for a, b, r in zip(starts, ends, radii):
        occupied |= _segment_distances(centers, a, b) <= r
    return VoxelGrid(cells[occupied], step)


def inter_volume(hand_capsules: Sequence[Tuple[np.ndarray, np.ndarray, np.ndarray]], object_grid: VoxelGrid,
                 last_n: int) -> float:
    """
    最后 n 帧中手与物体相交体积的最大值（cm³）

    Args:
        hand_capsules: 每帧的 (starts, ends, radii)
        object_grid: 物体实体体素
        last_n: 帧窗口（1、5、10）

    Returns:
        cm³
    """
    if object_grid.count == 0 or len(hand_capsules) == 0:
        return 0.0
    region = object_grid.bounds()
    volumes = []
    for starts, ends, radii in list(hand_capsules)[-last_n:]:
        hand_grid = voxelize_capsules(starts, ends, radii, object_grid.step, region=region)
        volumes.append(intersection_volume(hand_grid, object_grid))
    return float(max(volumes))
