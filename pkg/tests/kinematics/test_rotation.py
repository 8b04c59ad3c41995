# 旋转表示测试用例

import numpy as np
import pytest

from common.errors import DataValidationError, DegenerateRotationError
from kinematics.pose import IDENTITY_6D
from kinematics.rotation import (
    angle_between,
    axis_angle_matrix,
    matrix_to_rot6d,
    orthonormalize_rot6d,
    rot6d_to_matrix,
    rotation_between
)


class TestRotation6D:
    """
    6D 旋转表示测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.rng = np.random.default_rng(0)

    def test_identity_decodes_to_identity(self):
        """
        测试单位 6D 向量解码为单位矩阵
        """
        assert np.allclose(rot6d_to_matrix(IDENTITY_6D), np.eye(3), atol=1e-12)

    def test_matrix_round_trip(self):
        """
        测试旋转矩阵 -> 6D -> 旋转矩阵
        """
        for _ in range(5):
            R = axis_angle_matrix(self.rng.normal(size=3), self.rng.uniform(-np.pi, np.pi))
            assert np.allclose(rot6d_to_matrix(matrix_to_rot6d(R)), R, atol=1e-12)

    def test_unnormalized_input_is_orthonormalized(self):
        """
        测试非正交 6D 输入经 Gram-Schmidt 得到合法旋转
        """
        R = rot6d_to_matrix([2.0, 0.0, 0.0, 1.0, 3.0, 0.0])
        assert np.allclose(R, np.eye(3), atol=1e-12)

        R = rot6d_to_matrix(self.rng.normal(size=(4, 6)))
        assert np.allclose(np.swapaxes(R, -1, -2) @ R, np.eye(3), atol=1e-12)
        assert np.allclose(np.linalg.det(R), 1.0, atol=1e-12)

    def test_zero_first_column_raises(self):
        """
        测试第一列为零向量
        """
        with pytest.raises(DegenerateRotationError):
            rot6d_to_matrix([0.0, 0.0, 0.0, 0.0, 1.0, 0.0])

    def test_parallel_columns_raise(self):
        """
        测试两列平行
        """
        with pytest.raises(DegenerateRotationError):
            rot6d_to_matrix([1.0, 0.0, 0.0, 2.0, 0.0, 0.0])

    def test_wrong_shape_raises(self):
        """
        测试维度错误
        """
        with pytest.raises(DataValidationError):
            rot6d_to_matrix([1.0, 0.0, 0.0, 0.0, 1.0])

    def test_non_orthonormal_matrix_rejected(self):
        """
        测试非正交矩阵无法编码
        """
        with pytest.raises(DataValidationError):
            matrix_to_rot6d(np.diag([1.0, 2.0, 1.0]))
        with pytest.raises(DataValidationError):
            matrix_to_rot6d(np.diag([1.0, 1.0, -1.0]))

    def test_orthonormalize_is_idempotent(self):
        """
        测试规范化两次结果不变
        """
        v = orthonormalize_rot6d(self.rng.normal(size=6))
        assert np.allclose(orthonormalize_rot6d(v), v, atol=1e-12)


class TestRotationHelpers:
    """
    旋转构造工具测试类
    """

    def test_axis_angle_quarter_turn(self):
        """
        测试绕 z 轴旋转 90 度
        """
        R = axis_angle_matrix([0.0, 0.0, 1.0], np.pi / 2)
        assert np.allclose(R @ [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], atol=1e-12)

    def test_rotation_between_maps_direction(self):
        """
        测试最小旋转把 u 转到 v
        """
        u = np.array([1.0, 2.0, 0.5])
        v = np.array([-0.3, 0.1, 1.0])
        R = rotation_between(u, v)
        assert np.allclose(R @ (u / np.linalg.norm(u)), v / np.linalg.norm(v), atol=1e-12)

    def test_rotation_between_opposite_directions(self):
        """
        测试反向向量使用回退轴旋转 pi
        """
        R = rotation_between([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], fallback_axis=[0.0, 0.0, 1.0])
        assert np.allclose(R @ [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], atol=1e-12)
        assert np.allclose(R @ [0.0, 0.0, 1.0], [0.0, 0.0, 1.0], atol=1e-12)

    def test_rotation_between_same_direction_is_identity(self):
        """
        测试同向时返回单位阵
        """
        assert np.allclose(rotation_between([0.0, 1.0, 0.0], [0.0, 3.0, 0.0]), np.eye(3))

    def test_angle_between(self):
        """
        测试夹角
        """
        assert angle_between([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]) == pytest.approx(np.pi / 2)
        assert angle_between([1.0, 0.0, 0.0], [1.0, 1e-9, 0.0]) == pytest.approx(1e-9, rel=1e-6)
