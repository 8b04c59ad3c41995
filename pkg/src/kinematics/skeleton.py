# Skeleton Definition
# 骨架定义：关节树、静止姿态方向与骨长向量 k

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from common.errors import DataValidationError

BODY_JOINT_NAMES = (
    'pelvis', 'left_hip', 'right_hip', 'spine1', 'left_knee', 'right_knee', 'spine2',
    'left_ankle', 'right_ankle', 'spine3', 'left_foot', 'right_foot', 'neck',
    'left_collar', 'right_collar', 'head', 'left_shoulder', 'right_shoulder',
    'left_elbow', 'right_elbow', 'left_wrist', 'right_wrist'
)

FINGER_NAMES = ('index', 'middle', 'pinky', 'ring', 'thumb')
# 与 pinky 区分：抓取时需要接触物体的四个手指
CONTACT_FINGER_NAMES = ('thumb', 'index', 'middle', 'ring')

RIGHT_HAND_JOINT_NAMES = tuple(
    f"right_{finger}{k}" for finger in FINGER_NAMES for k in (1, 2, 3)
)

NUM_JOINTS = len(BODY_JOINT_NAMES) + len(RIGHT_HAND_JOINT_NAMES)
NUM_BODY_JOINTS = len(BODY_JOINT_NAMES)

# 默认骨架的静止偏移（米），y 轴向上，角色面向 +z，左侧为 +x
_DEFAULT_OFFSETS = {
    'left_hip': (0.06, -0.09, 0.0),
    'right_hip': (-0.06, -0.09, 0.0),
    'spine1': (0.0, 0.11, -0.01),
    'left_knee': (0.0, -0.38, 0.01),
    'right_knee': (0.0, -0.38, 0.01),
    'spine2': (0.0, 0.13, 0.0),
    'left_ankle': (0.0, -0.40, -0.04),
    'right_ankle': (0.0, -0.40, -0.04),
    'spine3': (0.0, 0.05, 0.02),
    'left_foot': (0.0, -0.06, 0.12),
    'right_foot': (0.0, -0.06, 0.12),
    'neck': (0.0, 0.21, -0.03),
    'left_collar': (0.08, 0.11, -0.02),
    'right_collar': (-0.08, 0.11, -0.02),
    'head': (0.0, 0.09, 0.05),
    'left_shoulder': (0.12, 0.03, -0.01),
    'right_shoulder': (-0.12, 0.03, -0.01),
    'left_elbow': (0.25, 0.0, -0.02),
    'right_elbow': (-0.25, 0.0, -0.02),
    'left_wrist': (0.25, 0.0, 0.02),
    'right_wrist': (-0.25, 0.0, 0.02),
    'right_index1': (-0.095, -0.005, 0.025),
    'right_index2': (-0.035, -0.003, 0.0),
    'right_index3': (-0.025, -0.002, 0.0),
    'right_middle1': (-0.098, -0.004, 0.004),
    'right_middle2': (-0.038, -0.003, 0.0),
    'right_middle3': (-0.027, -0.002, 0.0),
    'right_pinky1': (-0.080, -0.008, -0.038),
    'right_pinky2': (-0.025, -0.002, -0.004),
    'right_pinky3': (-0.018, -0.002, -0.002),
    'right_ring1': (-0.090, -0.006, -0.018),
    'right_ring2': (-0.033, -0.003, -0.002),
    'right_ring3': (-0.025, -0.002, -0.001),
    'right_thumb1': (-0.030, -0.015, 0.030),
    'right_thumb2': (-0.025, -0.008, 0.022),
    'right_thumb3': (-0.022, -0.004, 0.018),
}

_DEFAULT_BODY_PARENTS = (-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19)

_DEFAULT_TIP_LENGTHS = {'index': 0.022, 'middle': 0.024, 'pinky': 0.019, 'ring': 0.022, 'thumb': 0.022}


@dataclass(frozen=True)
class HandSpec:
    """
    手部胶囊体参数
    """
    finger_radius: float = 0.008
    palm_radius: float = 0.035
    tip_lengths: Dict[str, float] = field(default_factory=lambda: dict(_DEFAULT_TIP_LENGTHS))

    def validate(self):
        if self.finger_radius <= 0 or self.palm_radius <= 0:
            raise DataValidationError("hand capsule radii must be positive")
        missing = [name for name in FINGER_NAMES if name not in self.tip_lengths]
        if missing:
            raise DataValidationError(f"hand tip_lengths missing fingers: {missing}")
        if any(self.tip_lengths[name] <= 0 for name in FINGER_NAMES):
            raise DataValidationError("hand tip_lengths must be positive")


@dataclass(frozen=True, eq=False)
class Skeleton:
    """
    骨架：关节名称、父关节索引、静止方向与骨长

    rest_dirs 与 bone_lengths 对每个非根关节各有一项（按关节顺序，跳过根）。
    父关节索引必须小于子关节索引，这样一次前向遍历即可完成正向运动学。
    """
    joint_names: Tuple[str, ...]
    parents: Tuple[int, ...]
    rest_dirs: np.ndarray
    bone_lengths: np.ndarray
    hand: HandSpec = field(default_factory=HandSpec)

    def __post_init__(self):
        rest_dirs = np.array(self.rest_dirs, dtype=np.float64)
        bone_lengths = np.array(self.bone_lengths, dtype=np.float64)
        rest_dirs.flags.writeable = False
        bone_lengths.flags.writeable = False
        object.__setattr__(self, 'joint_names', tuple(self.joint_names))
        object.__setattr__(self, 'parents', tuple(int(p) for p in self.parents))
        object.__setattr__(self, 'rest_dirs', rest_dirs)
        object.__setattr__(self, 'bone_lengths', bone_lengths)
        self.validate()

    def validate(self):
        """
        校验骨架不变量

        Raises:
            DataValidationError: 任一不变量不满足
        """
        n = len(self.joint_names)
        if len(self.parents) != n:
            raise DataValidationError(f"parents has {len(self.parents)} entries, expected {n}")
        if len(set(self.joint_names)) != n:
            raise DataValidationError("joint names must be unique")
        if self.parents[0] != -1:
            raise DataValidationError("joint 0 must be the root (parent -1)")
        for j in range(1, n):
            if not 0 <= self.parents[j] < j:
                raise DataValidationError(
                    f"joint {self.joint_names[j]} has parent {self.parents[j]}; parents must precede children"
                )
        if self.rest_dirs.shape != (n - 1, 3):
            raise DataValidationError(f"rest_dirs must have shape ({n - 1}, 3), got {self.rest_dirs.shape}")
        if self.bone_lengths.shape != (n - 1,):
            raise DataValidationError(f"bone_lengths must have {n - 1} entries, got {self.bone_lengths.shape}")
        norms = np.linalg.norm(self.rest_dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            bad = int(np.argmax(np.abs(norms - 1.0))) + 1
            raise DataValidationError(f"rest_dir of joint {self.joint_names[bad]} is not unit length")
        if np.any(self.bone_lengths <= 0):
            raise DataValidationError("all bone lengths must be strictly positive")
        self.hand.validate()

    @property
    def num_joints(self) -> int:
        return len(self.joint_names)

    @property
    def k(self) -> np.ndarray:
        """骨长向量（角色标识）"""
        return self.bone_lengths

    @property
    def offsets(self) -> np.ndarray:
        """每个非根关节相对父关节的静止偏移，形状 (J-1, 3)"""
        return self.bone_lengths[:, None] * self.rest_dirs

    def joint_index(self, name: str) -> int:
        try:
            return self.joint_names.index(name)
        except ValueError:
            raise DataValidationError(f"unknown joint name: {name}")

    def indices(self, names: Sequence[str]) -> List[int]:
        return [self.joint_index(name) for name in names]

    def children(self, joint: int) -> List[int]:
        return [j for j, p in enumerate(self.parents) if p == joint]

    def rest_positions(self) -> np.ndarray:
        """
        静止姿态下（所有局部旋转为单位阵、根位于原点）的关节位置

        Returns:
            形状 (J, 3) 的数组
        """
        positions = np.zeros((self.num_joints, 3))
        offsets = self.offsets
        for j in range(1, self.num_joints):
            positions[j] = positions[self.parents[j]] + offsets[j - 1]
        return positions

    def is_descendant(self, joint: int, ancestor: int) -> bool:
        while joint != -1:
            if joint == ancestor:
                return True
            joint = self.parents[joint]
        return False

    def scaled(self, factor: float) -> 'Skeleton':
        """
        返回骨长整体缩放后的骨架（拓扑与方向不变）
        """
        return Skeleton(
            joint_names=self.joint_names,
            parents=self.parents,
            rest_dirs=self.rest_dirs,
            bone_lengths=self.bone_lengths * float(factor),
            hand=HandSpec(
                finger_radius=self.hand.finger_radius * float(factor),
                palm_radius=self.hand.palm_radius * float(factor),
                tip_lengths={k: v * float(factor) for k, v in self.hand.tip_lengths.items()}
            )
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'joint_names': list(self.joint_names),
            'parents': list(self.parents),
            'rest_dirs': self.rest_dirs.tolist(),
            'bone_lengths': self.bone_lengths.tolist(),
            'hand': {
                'finger_radius': self.hand.finger_radius,
                'palm_radius': self.hand.palm_radius,
                'tip_lengths': dict(self.hand.tip_lengths)
            }
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Skeleton':
        expected = {'joint_names', 'parents', 'rest_dirs', 'bone_lengths', 'hand'}
        unknown = set(data) - expected
        if unknown:
            raise DataValidationError(f"unknown skeleton fields: {sorted(unknown)}")
        missing = expected - set(data) - {'hand'}
        if missing:
            raise DataValidationError(f"missing skeleton fields: {sorted(missing)}")
        hand_data = data.get('hand') or {}
        unknown_hand = set(hand_data) - {'finger_radius', 'palm_radius', 'tip_lengths'}
        if unknown_hand:
            raise DataValidationError(f"unknown skeleton.hand fields: {sorted(unknown_hand)}")
        return cls(
            joint_names=tuple(data['joint_names']),
            parents=tuple(data['parents']),
            rest_dirs=np.asarray(data['rest_dirs'], dtype=np.float64),
            bone_lengths=np.asarray(data['bone_lengths'], dtype=np.float64),
            hand=HandSpec(**hand_data)
        )


def default_skeleton(scale: float = 1.0) -> Skeleton:
    """
    构建默认 37 关节骨架（22 个身体关节 + 15 个右手关节）

    Args:
        scale: 骨长缩放系数

    Returns:
        Skeleton
    """
    names = BODY_JOINT_NAMES + RIGHT_HAND_JOINT_NAMES
    parents = list(_DEFAULT_BODY_PARENTS)
    right_wrist = BODY_JOINT_NAMES.index('right_wrist')
    for finger_index in range(len(FINGER_NAMES)):
        base = len(BODY_JOINT_NAMES) + 3 * finger_index
        parents.extend([right_wrist, base, base + 1])

    offsets = np.array([_DEFAULT_OFFSETS[name] for name in names[1:]], dtype=np.float64)
    lengths = np.linalg.norm(offsets, axis=1)
    skeleton = Skeleton(
        joint_names=names,
        parents=tuple(parents),
        rest_dirs=offsets / lengths[:, None],
        bone_lengths=lengths
    )
    return skeleton if scale == 1.0 else skeleton.scaled(scale)


def finger_joint_indices(skeleton: Skeleton, finger: str) -> List[int]:
    """
    某个手指从近端到远端的三个关节索引
    """
    return skeleton.indices([f"right_{finger}{k}" for k in (1, 2, 3)])


def hand_joint_indices(skeleton: Skeleton) -> List[int]:
    """
    右手全部 15 个手指关节索引（按姿态参数顺序）
    """
    return skeleton.indices(RIGHT_HAND_JOINT_NAMES)


def optimized_hand_joint_indices(skeleton: Skeleton) -> List[int]:
    """
    手部优化涉及的 12 个关节：拇指、食指、中指、无名指各 3 个
    """
    indices = []
    for finger in CONTACT_FINGER_NAMES:
        indices.extend(finger_joint_indices(skeleton, finger))
    return indices
