# Procedural Hand Surface
# 程序化手部表面模型：按骨骼采样的胶囊体表面点（共 778 个），刚性绑定在手部骨骼上

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from common.errors import DataValidationError
from .forward_kinematics import global_transforms, fingertip_positions
from .skeleton import FINGER_NAMES, Skeleton, finger_joint_indices

FINGER_BONE_POINTS = 48
PALM_POINTS = 58
NUM_HAND_POINTS = 15 * FINGER_BONE_POINTS + PALM_POINTS
POINTS_PER_RING = 8
CAP_POLAR_ANGLE = np.deg2rad(50.0)


@dataclass(frozen=True)
class CapsuleBone:
    """
    一段胶囊体骨骼，端点定义在 owner 关节的局部坐标系中
    """
    name: str
    owner: int
    local_a: np.ndarray
    local_b: np.ndarray
    radius: float


@dataclass(frozen=True, eq=False)
class HandSurface:
    """
    手部表面模型

    Attributes:
        bones: 16 段胶囊体（手掌 + 15 段指骨）
        owners: 每个表面点所属关节索引 (778,)
        bone_ids: 每个表面点所属胶囊体索引 (778,)
        local_points: 表面点在所属关节坐标系中的固定偏移 (778, 3)
        local_normals: 表面点外法向（局部坐标系）(778, 3)
        finger_points: 手指名称 -> 该手指三段指骨的表面点索引
    """
    bones: Tuple[CapsuleBone, ...]
    owners: np.ndarray
    bone_ids: np.ndarray
    local_points: np.ndarray
    local_normals: np.ndarray
    finger_points: Dict[str, np.ndarray]

    @property
    def num_points(self) -> int:
        return int(self.local_points.shape[0])

    @property
    def radii(self) -> np.ndarray:
        return np.array([bone.radius for bone in self.bones])


def _perpendicular_basis(u: np.ndarray):
    helper = np.array([0.0, 1.0, 0.0]) if abs(u[1]) < 0.9 else np.array([0.0, 0.0, 1.0])
    e1 = np.cross(u, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    return e1, e2


def _cap_points(center, direction, e1, e2, radius, count):
    points, normals = [], []
    ring = count
    if count % 2 == 1:
        points.append(center + radius * direction)
        normals.append(direction)
        ring -= 1
    for k in range(ring):
        phi = 2.0 * np.pi * (k + 0.5) / ring
        n = np.cos(CAP_POLAR_ANGLE) * direction + np.sin(CAP_POLAR_ANGLE) * (np.cos(phi) * e1 + np.sin(phi) * e2)
        points.append(center + radius * n)
        normals.append(n)
    return points, normals


def sample_capsule(a, b, radius: float, count: int):
    """
    在胶囊体表面确定性地采样 count 个点

    侧面为若干圈、每圈 8 个点（奇数圈错开半个角步长），两端半球各若干点。

    Returns:
        (points, normals)：形状均为 (count, 3)
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    length = np.linalg.norm(b - a)
    if length <= 0:
        raise DataValidationError("capsule bone must have positive length")
    u = (b - a) / length
    e1, e2 = _perpendicular_basis(u)

    cap = next((c for c in range(4, 4 + POINTS_PER_RING) if (count - 2 * c) % POINTS_PER_RING == 0), None)
    if cap is None or count - 2 * cap <= 0:
        raise DataValidationError(f"cannot lay out {count} capsule samples in rings of {POINTS_PER_RING}")
    rings = (count - 2 * cap) // POINTS_PER_RING

    points, normals = [], []
    for r in range(rings):
        s = (r + 0.5) / rings
        shift = 0.5 if r % 2 else 0.0
        for k in range(POINTS_PER_RING):
            phi = 2.0 * np.pi * (k + shift) / POINTS_PER_RING
            n = np.cos(phi) * e1 + np.sin(phi) * e2
            points.append(a + s * (b - a) + radius * n)
            normals.append(n)
    for center, direction in ((b, u), (a, -u)):
        p, n = _cap_points(center, direction, e1, e2, radius, cap)
        points.extend(p)
        normals.extend(n)
    return np.array(points), np.array(normals)


def build_hand_surface(skeleton: Skeleton) -> HandSurface:
    """
    根据骨架构建程序化手部表面（手掌 58 点 + 15 段指骨各 48 点 = 778 点）

    Args:
        skeleton: 骨架（提供静止偏移与 hand 胶囊参数）

    Returns:
        HandSurface
    """
    offsets = skeleton.offsets
    wrist = skeleton.joint_index('right_wrist')
    middle1 = skeleton.joint_index('right_middle1')

    bones: List[CapsuleBone] = [
        CapsuleBone('palm', wrist, np.zeros(3), offsets[middle1 - 1].copy(), skeleton.hand.palm_radius)
    ]
    for finger in FINGER_NAMES:
        joints = finger_joint_indices(skeleton, finger)
        for k, joint in enumerate(joints):
            if k < 2:
                end = offsets[joints[k + 1] - 1].copy()
            else:
                end = skeleton.hand.tip_lengths[finger] * skeleton.rest_dirs[joint - 1]
            bones.append(CapsuleBone(f"{finger}{k + 1}", joint, np.zeros(3), end, skeleton.hand.finger_radius))

    owners, bone_ids, points, normals = [], [], [], []
    finger_points: Dict[str, List[int]] = {finger: [] for finger in FINGER_NAMES}
    for bone_id, bone in enumerate(bones):
        count = PALM_POINTS if bone_id == 0 else FINGER_BONE_POINTS
        p, n = sample_capsule(bone.local_a, bone.local_b, bone.radius, count)
        start = len(points)
        points.extend(p)
        normals.extend(n)
        owners.extend([bone.owner] * count)
        bone_ids.extend([bone_id] * count)
        if bone_id > 0:
            finger_points[FINGER_NAMES[(bone_id - 1) // 3]].extend(range(start, start + count))

    surface = HandSurface(
        bones=tuple(bones),
        owners=np.array(owners, dtype=np.int64),
        bone_ids=np.array(bone_ids, dtype=np.int64),
        local_points=np.array(points),
        local_normals=np.array(normals),
        finger_points={k: np.array(v, dtype=np.int64) for k, v in finger_points.items()}
    )
    if surface.num_points != NUM_HAND_POINTS:
        raise DataValidationError(f"hand surface has {surface.num_points} points, expected {NUM_HAND_POINTS}")
    return surface


def surface_from_transforms(hand: HandSurface, rotations: np.ndarray, positions: np.ndarray):
    """
    由全局变换求世界坐标下的表面点和法向

    Returns:
        (points, normals)：形状 (..., 778, 3)
    """
    owner_rot = rotations[..., hand.owners, :, :]
    points = np.einsum('...nij,nj->...ni', owner_rot, hand.local_points) + positions[..., hand.owners, :]
    normals = np.einsum('...nij,nj->...ni', owner_rot, hand.local_normals)
    return points, normals


def hand_surface_points(skeleton: Skeleton, pose, hand: HandSurface) -> np.ndarray:
    """
    手部 778 个表面点的世界坐标

    Args:
        skeleton: 骨架
        pose: Pose 或 (..., 225) 姿态向量
        hand: 手部表面模型

    Returns:
        形状 (..., 778, 3)
    """
    rotations, positions = global_transforms(skeleton, pose)
    return surface_from_transforms(hand, rotations, positions)[0]


def hand_surface_with_normals(skeleton: Skeleton, pose, hand: HandSurface):
    rotations, positions = global_transforms(skeleton, pose)
    return surface_from_transforms(hand, rotations, positions)


def finger_keypoints(skeleton: Skeleton, pose) -> np.ndarray:
    """
    每个手指 7 个关键点：3 个关节、3 个骨骼中点、指尖

    Returns:
        形状 (..., 5, 7, 3)，手指顺序与 FINGER_NAMES 一致
    """
    rotations, positions = global_transforms(skeleton, pose)
    tips = fingertip_positions(skeleton, rotations, positions)
    result = []
    for g, finger in enumerate(FINGER_NAMES):
        joints = positions[..., finger_joint_indices(skeleton, finger), :]
        tip = tips[..., g, :]
        chain = np.concatenate([joints, tip[..., None, :]], axis=-2)
        mids = 0.5 * (chain[..., :-1, :] + chain[..., 1:, :])
        result.append(np.concatenate([joints, mids, tip[..., None, :]], axis=-2))
    return np.stack(result, axis=-3)


def capsule_segments(hand: HandSurface, rotations: np.ndarray, positions: np.ndarray):
    """
    胶囊体在世界坐标下的端点与半径（用于体素化）

    Returns:
        (A, B, radii)：形状 (..., 16, 3)、(..., 16, 3)、(16,)
    """
    owners = np.array([bone.owner for bone in hand.bones])
    local_a = np.stack([bone.local_a for bone in hand.bones])
    local_b = np.stack([bone.local_b for bone in hand.bones])
    owner_rot = rotations[..., owners, :, :]
    origin = positions[..., owners, :]
    A = np.einsum('...nij,nj->...ni', owner_rot, local_a) + origin
    B = np.einsum('...nij,nj->...ni', owner_rot, local_b) + origin
    return A, B, hand.radii


def capsule_signed_distance(points, starts, ends, radii) -> np.ndarray:
    """
    点到胶囊体并集的有符号距离（内部为负）

    Args:
        points: (N, 3)
        starts: (B, 3) 胶囊端点
        ends: (B, 3) 胶囊端点
        radii: (B,) 半径

    Returns:
        (N,)
    """
    points = np.asarray(points, dtype=np.float64)
    starts = np.asarray(starts, dtype=np.float64)
    ab = np.asarray(ends, dtype=np.float64) - starts
    denom = np.maximum(np.einsum('bj,bj->b', ab, ab), 1e-30)
    rel = points[:, None, :] - starts[None]
    s = np.clip(np.einsum('nbj,bj->nb', rel, ab) / denom, 0.0, 1.0)
    gap = np.linalg.norm(rel - s[..., None] * ab[None], axis=-1) - np.asarray(radii, dtype=np.float64)
    return gap.min(axis=1)
