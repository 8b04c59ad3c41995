# 两骨骼 IK 测试用例

import numpy as np
import pytest

from common.errors import DataValidationError
from kinematics.forward_kinematics import forward_kinematics
from kinematics.pose import identity_vector, rotation_slice
from kinematics.skeleton import default_skeleton
from refinement.ik.two_bone_ik import IKChain, solve_two_bone, two_bone_ik


def _random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


class TestSolveTwoBone:
    """
    解析两骨骼 IK 测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.base = np.zeros(3)
        self.mid = np.array([0.3, 0.0, 0.0])
        self.end = np.array([0.3, -0.25, 0.05])

    def test_reachable_target(self):
        """
        测试可达目标：末端到达目标（1e-5 米）
        """
        target = np.array([0.1, -0.3, 0.2])
        solution = solve_two_bone(self.base, self.mid, self.end, target)
        assert not solution.clamped
        assert np.linalg.norm(solution.end_position - target) < 1e-5

        # 由增量重建末端位置
        mid = self.base + solution.base_delta @ (self.mid - self.base)
        end = mid + solution.base_delta @ solution.mid_delta @ (self.end - self.mid)
        assert np.linalg.norm(end - target) < 1e-5

    def test_unreachable_target_straightens_toward_target(self):
        """
        测试不可达目标：链条伸直并指向目标
        """
        target = np.array([2.0, 1.0, 0.0])
        solution = solve_two_bone(self.base, self.mid, self.end, target)
        assert solution.clamped
        reach = np.linalg.norm(self.mid - self.base) + np.linalg.norm(self.end - self.mid)
        assert np.linalg.norm(solution.end_position - self.base) == pytest.approx(reach, abs=1e-9)
        direction = solution.end_position / np.linalg.norm(solution.end_position)
        assert np.allclose(direction, target / np.linalg.norm(target), atol=1e-9)

    def test_target_at_end_is_identity(self):
        """
        测试目标就是当前末端时不做任何旋转
        """
        solution = solve_two_bone(self.base, self.mid, self.end, self.end)
        assert solution.is_identity
        assert not solution.clamped

    def test_random_reachable_targets(self):
        """
        测试 1000 组随机链条与可达目标
        """
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(1000):
            base = rng.normal(size=3)
            mid = base + rng.uniform(0.1, 0.5) * _random_unit(rng)
            end = mid + rng.uniform(0.1, 0.5) * _random_unit(rng)
            l1, l2 = np.linalg.norm(mid - base), np.linalg.norm(end - mid)
            margin = 1e-3 * (l1 + l2)
            distance = rng.uniform(abs(l1 - l2) + margin, l1 + l2 - margin)
            target = base + distance * _random_unit(rng)
            solution = solve_two_bone(base, mid, end, target)
            assert not solution.clamped
            worst = max(worst, np.linalg.norm(solution.end_position - target))
        assert worst < 1e-5

    def test_random_unreachable_targets(self):
        """
        测试随机不可达目标落在最大伸展处
        """
        rng = np.random.default_rng(1)
        for _ in range(200):
            mid = rng.uniform(0.1, 0.5) * _random_unit(rng)
            end = mid + rng.uniform(0.1, 0.5) * _random_unit(rng)
            reach = np.linalg.norm(mid) + np.linalg.norm(end - mid)
            direction = _random_unit(rng)
            solution = solve_two_bone(np.zeros(3), mid, end, rng.uniform(1.05, 3.0) * reach * direction)
            assert solution.clamped
            assert np.allclose(solution.end_position, reach * direction, atol=1e-9)

    def test_zero_length_bone_rejected(self):
        """
        测试骨长为零
        """
        with pytest.raises(DataValidationError):
            solve_two_bone(self.base, self.base, self.end, self.end)


class TestTwoBoneIK:
    """
    姿态级两骨骼 IK 测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.skeleton = default_skeleton()
        self.pose = identity_vector([0.0, 0.9, 0.0])
        names = self.skeleton.joint_names
        self.chain = IKChain(
            base=names.index('right_shoulder'),
            mid=names.index('right_elbow'),
            end=names.index('right_wrist')
        )

    def test_wrist_reaches_target(self):
        """
        测试手腕到达目标，且只修改肩、肘的旋转
        """
        shoulder = forward_kinematics(self.skeleton, self.pose)[self.chain.base]
        target = shoulder + np.array([-0.2, -0.2, 0.15])
        params, solution = two_bone_ik(self.skeleton, self.pose, self.chain, target)

        positions = forward_kinematics(self.skeleton, params)
        assert np.linalg.norm(positions[self.chain.end] - target) < 1e-5
        changed = np.flatnonzero(params != self.pose)
        allowed = set(range(225)[rotation_slice(self.chain.base)]) | set(range(225)[rotation_slice(self.chain.mid)])
        assert set(changed) <= allowed

    def test_bone_lengths_preserved(self):
        """
        测试 IK 后骨长不变
        """
        shoulder = forward_kinematics(self.skeleton, self.pose)[self.chain.base]
        params, _ = two_bone_ik(self.skeleton, self.pose, self.chain, shoulder + np.array([-0.1, -0.3, 0.2]))
        positions = forward_kinematics(self.skeleton, params)
        parents = np.array(self.skeleton.parents[1:])
        assert np.allclose(np.linalg.norm(positions[1:] - positions[parents], axis=1), self.skeleton.bone_lengths)

    def test_current_position_leaves_pose_unchanged(self):
        """
        测试目标为当前位置时姿态逐位不变
        """
        wrist = forward_kinematics(self.skeleton, self.pose)[self.chain.end]
        params, solution = two_bone_ik(self.skeleton, self.pose, self.chain, wrist)
        assert solution.is_identity
        assert np.array_equal(params, self.pose)

    def test_invalid_chain_rejected(self):
        """
        测试非父子关系的关节链
        """
        names = self.skeleton.joint_names
        chain = IKChain(base=names.index('right_shoulder'), mid=names.index('right_wrist'),
                        end=names.index('right_index1'))
        with pytest.raises(DataValidationError):
            two_bone_ik(self.skeleton, self.pose, chain, np.zeros(3))
