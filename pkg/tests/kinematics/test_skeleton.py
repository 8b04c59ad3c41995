# 骨架测试用例

from pathlib import Path

import numpy as np
import pytest

from common.errors import DataValidationError
from data.storage.motion_storage import load_skeleton
from kinematics.skeleton import (
    CONTACT_FINGER_NAMES,
    NUM_JOINTS,
    Skeleton,
    default_skeleton,
    finger_joint_indices,
    hand_joint_indices,
    optimized_hand_joint_indices
)

BUNDLED_SKELETON = Path(__file__).resolve().parents[2] / 'data' / 'skeletons' / 'default_skeleton.json'


class TestSkeleton:
    """
    骨架测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.skeleton = default_skeleton()

    def test_default_skeleton_layout(self):
        """
        测试默认骨架：37 个关节、36 个骨长
        """
        assert self.skeleton.num_joints == NUM_JOINTS == 37
        assert self.skeleton.k.shape == (36,)
        assert np.all(self.skeleton.k > 0)
        assert np.allclose(np.linalg.norm(self.skeleton.rest_dirs, axis=1), 1.0)

    def test_rest_positions_face_conventions(self):
        """
        测试静止姿态：左髋在 +x，头在骨盆上方，右手指指向 -x
        """
        rest = self.skeleton.rest_positions()
        names = self.skeleton.joint_names
        assert rest[names.index('left_hip'), 0] > 0
        assert rest[names.index('head'), 1] > 0.5
        wrist = rest[names.index('right_wrist')]
        assert rest[names.index('right_middle3'), 0] < wrist[0]

    def test_hand_indices(self):
        """
        测试手部关节索引
        """
        assert len(hand_joint_indices(self.skeleton)) == 15
        assert len(optimized_hand_joint_indices(self.skeleton)) == 3 * len(CONTACT_FINGER_NAMES)
        index = finger_joint_indices(self.skeleton, 'index')
        assert self.skeleton.parents[index[0]] == self.skeleton.joint_index('right_wrist')
        assert self.skeleton.parents[index[2]] == index[1]

    def test_scaled_skeleton(self):
        """
        测试骨长缩放
        """
        scaled = self.skeleton.scaled(1.1)
        assert np.allclose(scaled.k, 1.1 * self.skeleton.k)
        assert np.allclose(scaled.rest_dirs, self.skeleton.rest_dirs)
        assert scaled.hand.finger_radius == pytest.approx(1.1 * self.skeleton.hand.finger_radius)

    def test_parent_must_precede_child(self):
        """
        测试父关节索引必须小于子关节
        """
        parents = list(self.skeleton.parents)
        parents[3] = 5
        with pytest.raises(DataValidationError):
            Skeleton(self.skeleton.joint_names, parents, self.skeleton.rest_dirs, self.skeleton.bone_lengths)

    def test_non_positive_bone_length_rejected(self):
        """
        测试骨长必须为正
        """
        lengths = self.skeleton.bone_lengths.copy()
        lengths[4] = 0.0
        with pytest.raises(DataValidationError):
            Skeleton(self.skeleton.joint_names, self.skeleton.parents, self.skeleton.rest_dirs, lengths)

    def test_non_unit_rest_dir_rejected(self):
        """
        测试静止方向必须为单位向量
        """
        dirs = self.skeleton.rest_dirs.copy()
        dirs[0] *= 2.0
        with pytest.raises(DataValidationError):
            Skeleton(self.skeleton.joint_names, self.skeleton.parents, dirs, self.skeleton.bone_lengths)

    def test_dict_round_trip(self):
        """
        测试字典序列化
        """
        restored = Skeleton.from_dict(self.skeleton.to_dict())
        assert restored.joint_names == self.skeleton.joint_names
        assert np.array_equal(restored.offsets, self.skeleton.offsets)

    def test_unknown_field_rejected(self):
        """
        测试未知字段
        """
        data = self.skeleton.to_dict()
        data['extra'] = 1
        with pytest.raises(DataValidationError):
            Skeleton.from_dict(data)

    def test_bundled_skeleton_matches_default(self):
        """
        测试随仓库发布的骨架文件与默认骨架一致
        """
        bundled = load_skeleton(BUNDLED_SKELETON)
        assert bundled.joint_names == self.skeleton.joint_names
        assert bundled.parents == self.skeleton.parents
        assert np.allclose(bundled.offsets, self.skeleton.offsets, atol=1e-12)
