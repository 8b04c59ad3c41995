# 训练数据处理测试用例

import numpy as np
import pytest

from common.errors import DataValidationError
from config.pipeline_config import SynthSettings
from data.collectors.synthetic_collector import SyntheticCollector, training_samples
from data.processors.training_processor import TrainingProcessor, TrainingSample, label_contacts
from kinematics.pose import identity_vector
from kinematics.skeleton import default_skeleton
from motion.sequence import MotionSequence


class TestContactLabels:
    """
    触地标签测试类
    """

    def test_static_feet_are_contacts(self):
        """
        测试静止的脚全部标记为触地
        """
        positions = np.zeros((10, 37, 3))
        labels = label_contacts(positions, (1, 2), fps=30.0)
        assert labels.shape == (10, 2)
        assert np.all(labels == 1.0)

    def test_moving_foot_is_not_contact(self):
        """
        测试 0.6 m/s 移动的脚不是触地，速度取相邻两段的较大值
        """
        positions = np.zeros((10, 37, 3))
        positions[5:, 2, 0] = 0.02 * np.arange(5)
        labels = label_contacts(positions, (1, 2), fps=30.0)
        assert np.all(labels[:, 0] == 1.0)
        assert list(labels[:, 1]) == [1, 1, 1, 1, 1, 0, 0, 0, 0, 0]

    def test_threshold(self):
        """
        测试速度阈值
        """
        positions = np.zeros((3, 37, 3))
        positions[:, 1, 0] = [0.0, 0.0005, 0.0010]
        assert np.all(label_contacts(positions, (1, 2), fps=20.0, speed_threshold=0.009)[:, 0] == 0.0)
        assert np.all(label_contacts(positions, (1, 2), fps=20.0, speed_threshold=0.011)[:, 0] == 1.0)


class TestTrainingProcessor:
    """
    训练数据处理器测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.samples = training_samples(SyntheticCollector(SynthSettings(count=3), T=6).collect(seed=0))
        self.processor = TrainingProcessor({'num_frames': 7})

    def test_batch_shapes(self):
        """
        测试批次张量形状与类型
        """
        batch = self.processor.process(self.samples)
        assert batch['tokens'].shape == (3, 7, 337)
        assert batch['bone_lengths'].shape == (3, 36)
        assert batch['params'].shape == (3, 7, 225)
        assert batch['contacts'].shape == (3, 7, 2)
        assert batch['offsets'].shape == (3, 1, 36, 3)
        assert all(value.dtype == np.float32 for value in batch.values())

    def test_tokens_hold_endpoints(self):
        """
        测试 token 端点等于真值端点、内部帧标志为 1
        """
        batch = self.processor.process(self.samples)
        assert np.allclose(batch['tokens'][:, 0, :225], batch['params'][:, 0])
        assert np.allclose(batch['tokens'][:, -1, :225], batch['params'][:, -1])
        assert np.all(batch['tokens'][:, 1:-1, -1] == 1.0)
        assert np.all(batch['tokens'][:, [0, -1], -1] == 0.0)

    def test_length_mismatch_rejected(self):
        """
        测试帧数与配置不符
        """
        with pytest.raises(DataValidationError):
            TrainingProcessor({'num_frames': 9}).process(self.samples)
        with pytest.raises(DataValidationError):
            self.processor.process([])

    def test_sample_requires_binary_labels(self):
        """
        测试训练样本需要 0/1 触地标签
        """
        params = np.stack([identity_vector([0.0, 0.9, 0.0])] * 3)
        skeleton = default_skeleton()
        with pytest.raises(DataValidationError):
            TrainingSample(MotionSequence(params), skeleton)
        with pytest.raises(DataValidationError):
            TrainingSample(MotionSequence(params, 30.0, np.full((3, 2), 0.5)), skeleton)
