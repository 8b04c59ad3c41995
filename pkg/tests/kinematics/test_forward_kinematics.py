# 正向运动学测试用例

import numpy as np
import pytest
import tensorflow as tf

from common.errors import DataValidationError
from kinematics.differentiable import fk_jacobian, tf_global_transforms, tf_wrist_local_fingers, skeleton_constants
from kinematics.forward_kinematics import forward_kinematics, global_transforms, wrist_local_finger_positions
from kinematics.hand_model import (
    NUM_HAND_POINTS,
    build_hand_surface,
    capsule_segments,
    finger_keypoints,
    hand_surface_with_normals
)
from kinematics.pose import POSE_DIM, Pose, identity_vector, rotation_slice
from kinematics.rotation import axis_angle_matrix, matrix_to_rot6d
from kinematics.skeleton import FINGER_NAMES, default_skeleton


def random_pose(rng, scale=0.4):
    """随机姿态：每个关节绕随机轴转动"""
    x = identity_vector(rng.normal(scale=0.2, size=3))
    for j in range(37):
        x[rotation_slice(j)] = matrix_to_rot6d(axis_angle_matrix(rng.normal(size=3), rng.normal(scale=scale)))
    return x


class TestForwardKinematics:
    """
    正向运动学测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.skeleton = default_skeleton()
        self.rng = np.random.default_rng(1)

    def test_identity_pose_gives_rest_positions(self):
        """
        测试单位姿态 = 静止姿态 + 根平移
        """
        t = np.array([0.3, 0.9, -0.2])
        positions = forward_kinematics(self.skeleton, identity_vector(t))
        assert positions.shape == (37, 3)
        assert np.allclose(positions, self.skeleton.rest_positions() + t, atol=1e-12)

    def test_pose_object_and_vector_agree(self):
        """
        测试 Pose 与 225 维向量输入一致
        """
        x = random_pose(self.rng)
        assert np.allclose(forward_kinematics(self.skeleton, Pose.from_vector(x)), forward_kinematics(self.skeleton, x))

    def test_root_rotation_rotates_all_joints(self):
        """
        测试全局朝向旋转整具骨架
        """
        R = axis_angle_matrix([0.0, 1.0, 0.0], 0.7)
        x = identity_vector()
        x[rotation_slice(0)] = matrix_to_rot6d(R)
        positions = forward_kinematics(self.skeleton, x)
        assert np.allclose(positions, self.skeleton.rest_positions() @ R.T, atol=1e-12)

    def test_bone_lengths_preserved(self):
        """
        测试任意姿态下骨长不变
        """
        positions = forward_kinematics(self.skeleton, random_pose(self.rng))
        parents = np.array(self.skeleton.parents[1:])
        lengths = np.linalg.norm(positions[1:] - positions[parents], axis=1)
        assert np.allclose(lengths, self.skeleton.bone_lengths, atol=1e-12)

    def test_batched_frames(self):
        """
        测试批量帧
        """
        params = np.stack([random_pose(self.rng) for _ in range(4)])
        batch = forward_kinematics(self.skeleton, params)
        assert batch.shape == (4, 37, 3)
        assert np.allclose(batch[2], forward_kinematics(self.skeleton, params[2]))

    def test_wrong_dimension_raises(self):
        """
        测试维度错误
        """
        with pytest.raises(DataValidationError):
            forward_kinematics(self.skeleton, np.zeros(POSE_DIM - 1))

    def test_wrist_local_fingers_invariant_to_root(self):
        """
        测试腕部局部手指位置与根节点变换无关
        """
        x = random_pose(self.rng)
        moved = x.copy()
        moved[:3] += [1.0, 0.0, 2.0]
        moved[rotation_slice(0)] = matrix_to_rot6d(axis_angle_matrix([0.2, 1.0, 0.0], 1.3))
        assert np.allclose(
            wrist_local_finger_positions(self.skeleton, x),
            wrist_local_finger_positions(self.skeleton, moved),
            atol=1e-12
        )


class TestDifferentiableKinematics:
    """
    可微正向运动学测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.skeleton = default_skeleton()
        self.rng = np.random.default_rng(2)

    def test_matches_numpy(self):
        """
        测试 TensorFlow 与 numpy 实现一致
        """
        params = np.stack([random_pose(self.rng) for _ in range(3)])
        rotations, positions = tf_global_transforms(
            tf.constant(params), self.skeleton.offsets, self.skeleton.parents
        )
        R, P = global_transforms(self.skeleton, params)
        assert np.allclose(positions.numpy(), P, atol=1e-10)
        assert np.allclose(rotations.numpy(), R, atol=1e-10)

    def test_wrist_local_fingers_match_numpy(self):
        """
        测试可微腕部局部手指位置
        """
        x = random_pose(self.rng)
        constants = skeleton_constants(self.skeleton)
        rotations, positions = tf_global_transforms(tf.constant(x), constants['offsets'], constants['parents'])
        local = tf_wrist_local_fingers(rotations, positions, constants['wrist'], constants['fingers'])
        assert np.allclose(local.numpy(), wrist_local_finger_positions(self.skeleton, x), atol=1e-10)

    def test_jacobian_matches_finite_difference(self):
        """
        测试解析雅可比与中心差分一致（步长 1e-5，相对误差 1e-4）
        """
        x = random_pose(self.rng)
        joints = [self.skeleton.joint_index('right_wrist'), self.skeleton.joint_index('left_foot')]
        params = list(range(0, 3)) + list(range(rotation_slice(19).start, rotation_slice(19).stop))
        J = fk_jacobian(self.skeleton, x, joints, params)
        assert J.shape == (6, len(params))

        h = 1e-5
        numeric = np.zeros_like(J)
        for col, p in enumerate(params):
            plus, minus = x.copy(), x.copy()
            plus[p] += h
            minus[p] -= h
            diff = forward_kinematics(self.skeleton, plus)[joints] - forward_kinematics(self.skeleton, minus)[joints]
            numeric[:, col] = diff.reshape(-1) / (2 * h)
        scale = max(np.abs(numeric).max(), 1e-8)
        assert np.abs(J - numeric).max() / scale < 1e-4


class TestHandSurface:
    """
    手部表面模型测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.skeleton = default_skeleton()
        self.hand = build_hand_surface(self.skeleton)

    def test_point_count(self):
        """
        测试表面点数量
        """
        assert self.hand.num_points == NUM_HAND_POINTS == 778
        assert set(self.hand.finger_points) == set(FINGER_NAMES)
        assert all(len(v) == 3 * 48 for v in self.hand.finger_points.values())

    def test_points_lie_on_capsules(self):
        """
        测试表面点到所属胶囊轴线的距离等于半径，法向为单位向量
        """
        points, normals = hand_surface_with_normals(self.skeleton, identity_vector(), self.hand)
        assert np.allclose(np.linalg.norm(normals, axis=1), 1.0, atol=1e-9)
        A, B, radii = capsule_segments(self.hand, *global_transforms(self.skeleton, identity_vector()))
        for bone_id in (0, 5):
            mask = self.hand.bone_ids == bone_id
            a, b = A[bone_id], B[bone_id]
            d = b - a
            s = np.clip((points[mask] - a) @ d / (d @ d), 0.0, 1.0)
            dist = np.linalg.norm(points[mask] - (a + s[:, None] * d), axis=1)
            assert np.allclose(dist, radii[bone_id], atol=1e-9)

    def test_finger_keypoints_shape(self):
        """
        测试手指关键点
        """
        keypoints = finger_keypoints(self.skeleton, identity_vector())
        assert keypoints.shape == (5, 7, 3)
        assert np.allclose(keypoints[:, 3], 0.5 * (keypoints[:, 0] + keypoints[:, 1]))
