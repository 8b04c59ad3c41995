# Contact Groups
# 触地概率阈值化与连续触地分组

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from common.errors import DataValidationError
from kinematics.skeleton import Skeleton

FEET = ('left', 'right')


@dataclass(frozen=True)
class LegChain:
    """
    一条腿的关节链：髋、膝、踝、脚
    """
    side: str
    hip: int
    knee: int
    ankle: int
    foot: int
    thigh_length: float
    shank_length: float

    @classmethod
    def from_skeleton(cls, skeleton: Skeleton, side: str) -> 'LegChain':
        if side not in FEET:
            raise DataValidationError(f"unknown leg side: {side}")
        hip, knee, ankle, foot = skeleton.indices([f"{side}_{name}" for name in ('hip', 'knee', 'ankle', 'foot')])
        for child, parent in ((knee, hip), (ankle, knee), (foot, ankle)):
            if skeleton.parents[child] != parent:
                raise DataValidationError(
                    f"leg joints {skeleton.joint_names[parent]} -> {skeleton.joint_names[child]} are not parent and child"
                )
        return cls(
            side=side,
            hip=hip,
            knee=knee,
            ankle=ankle,
            foot=foot,
            thigh_length=float(skeleton.bone_lengths[knee - 1]),
            shank_length=float(skeleton.bone_lengths[ankle - 1])
        )

    @property
    def refined_joints(self) -> Tuple[int, int]:
        return (self.hip, self.knee)


def leg_chains(skeleton: Skeleton) -> List[LegChain]:
    return [LegChain.from_skeleton(skeleton, side) for side in FEET]


@dataclass(frozen=True, eq=False)
class ContactGroup:
    """
    连续触地的帧区间 [start, end]（闭区间）及其目标脚位置
    """
    start: int
    end: int
    target: np.ndarray

    @property
    def frames(self) -> range:
        return range(self.start, self.end + 1)

    def __len__(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class ContactGroups:
    """
    左右脚各自的触地分组
    """
    left: List[ContactGroup] = field(default_factory=list)
    right: List[ContactGroup] = field(default_factory=list)

    def for_side(self, side: str) -> List[ContactGroup]:
        return self.left if side == 'left' else self.right

    @property
    def empty(self) -> bool:
        return not self.left and not self.right


def threshold_contacts(contact_probs, threshold: float = 0.5) -> np.ndarray:
    """
    按阈值把触地概率转为布尔值（p >= threshold 视为触地）

    Args:
        contact_probs: (N,) 或 (N, 2) 概率
        threshold: 阈值

    Returns:
        与输入同形状的布尔数组
    """
    probs = np.asarray(contact_probs, dtype=np.float64)
    if np.any(probs < 0) or np.any(probs > 1):
        raise DataValidationError("contact probabilities must lie in [0, 1]")
    return probs >= threshold


def contact_runs(booleans) -> List[Tuple[int, int]]:
    """
    布尔序列中所有极大的 True 区间（闭区间）
    """
    flags = np.asarray(booleans, dtype=bool)
    padded = np.concatenate([[False], flags, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return [(int(start), int(stop) - 1) for start, stop in zip(edges[::2], edges[1::2])]


def build_groups(booleans, foot_positions) -> List[ContactGroup]:
    """
    把连续触地帧分组并确定每组的目标位置

    包含末帧的组以末帧脚位置为目标，包含首帧的组以首帧脚位置为目标，
    其余组取组内脚位置均值。同时包含首末帧的组以末帧为准。

    Args:
        booleans: (N,) 阈值化后的触地标志
        foot_positions: (N, 3) 脚关节位置

    Returns:
        按时间排序的 ContactGroup 列表
    """
    flags = np.asarray(booleans, dtype=bool)
    positions = np.asarray(foot_positions, dtype=np.float64)
    if positions.shape != (flags.shape[0], 3):
        raise DataValidationError(
            f"foot positions must have shape ({flags.shape[0]}, 3), got {positions.shape}"
        )
    last = flags.shape[0] - 1
    groups = []
    for start, end in contact_runs(flags):
        if end == last:
            target = positions[last].copy()
        elif start == 0:
            target = positions[0].copy()
        else:
            target = positions[start:end + 1].mean(axis=0)
        groups.append(ContactGroup(start=start, end=end, target=target))
    return groups


def build_contact_groups(contacts, foot_positions) -> ContactGroups:
    """
    两只脚的分组

    Args:
        contacts: (N, 2) 布尔数组（左、右）
        foot_positions: (N, 2, 3) 左右脚位置
    """
    contacts = np.asarray(contacts, dtype=bool)
    foot_positions = np.asarray(foot_positions, dtype=np.float64)
    return ContactGroups(
        left=build_groups(contacts[:, 0], foot_positions[:, 0]),
        right=build_groups(contacts[:, 1], foot_positions[:, 1])
    )
