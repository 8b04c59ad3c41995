# 生成器与推理测试用例

import numpy as np
import pytest

from ai.models.motion_generator import MotionGenerator
from ai.models.motion_transformer import TOKEN_DIM, positional_encoding
from ai.predictors.motion_predictor import MotionPredictor, generate
from common.errors import ConfigurationError, DataValidationError
from config.pipeline_config import GeneratorSettings
from kinematics.pose import identity_vector, rotation_slice
from kinematics.rotation import axis_angle_matrix, matrix_to_rot6d
from kinematics.skeleton import default_skeleton
from motion.sequence import seed_sequence, stack_tokens

SMALL = dict(layers=1, model_dim=16, heads=2, ff_dim=32, T=8)


class TestMotionGenerator:
    """
    生成器测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.config = GeneratorSettings(**SMALL)
        self.generator = MotionGenerator(self.config)
        self.skeleton = default_skeleton()
        start = identity_vector([0.0, 0.9, 0.0])
        target = identity_vector([0.2, 0.85, 0.4])
        target[rotation_slice(19)] = matrix_to_rot6d(axis_angle_matrix([0.0, 1.0, 0.0], 0.6))
        self.frames = seed_sequence(self.skeleton, start, target, self.config.T)

    def test_positional_encoding(self):
        """
        测试正弦位置编码
        """
        encoding = positional_encoding(9, 16)
        assert encoding.shape == (9, 16)
        assert np.allclose(encoding[0, 0::2], 0.0)
        assert np.allclose(encoding[0, 1::2], 1.0)

    def test_fresh_generator_outputs_zero_offsets(self):
        """
        测试未训练的生成器输出 ΔX = 0，触地概率在 (0, 1) 内
        """
        delta, contact = self.generator.predict(stack_tokens(self.frames), self.skeleton.bone_lengths)
        assert delta.shape == (9, 225)
        assert contact.shape == (9, 2)
        assert np.array_equal(delta, np.zeros_like(delta))
        assert np.all((contact > 0) & (contact < 1))

    def test_wrong_shapes_rejected(self):
        """
        测试输入形状不符
        """
        tokens = stack_tokens(self.frames)
        with pytest.raises(ConfigurationError):
            self.generator.predict(tokens[:-1], self.skeleton.bone_lengths)
        with pytest.raises(ConfigurationError):
            self.generator.predict(tokens, self.skeleton.bone_lengths[:-1])
        assert tokens.shape[1] == TOKEN_DIM

    def test_predictor_keeps_endpoints(self):
        """
        测试生成序列的端点等于给定姿态
        """
        output, sequence = MotionPredictor(self.generator).generate(self.frames, self.skeleton)
        assert sequence.num_frames == 9
        assert np.array_equal(sequence.params[0], self.frames[0].x)
        assert np.array_equal(sequence.params[-1], self.frames[-1].x)
        assert sequence.contact_probs.shape == (9, 2)
        assert np.array_equal(output.contact, sequence.contact_probs)

    def test_predictor_rejects_wrong_length(self):
        """
        测试帧数与配置不符
        """
        with pytest.raises(ConfigurationError):
            MotionPredictor(self.generator).generate(self.frames[:-1], self.skeleton)

    def test_weights_round_trip(self, tmp_path):
        """
        测试保存后加载的生成器输出一致
        """
        weights = self.generator.model.get_weights()
        rng = np.random.default_rng(0)
        self.generator.model.set_weights([w + 0.01 * rng.normal(size=w.shape).astype(w.dtype) for w in weights])
        path = tmp_path / 'generator.npz'
        self.generator.save(str(path))

        loaded = MotionGenerator.from_weights(str(path))
        tokens = stack_tokens(self.frames)
        expected = self.generator.predict(tokens, self.skeleton.bone_lengths)
        actual = loaded.predict(tokens, self.skeleton.bone_lengths)
        assert np.array_equal(expected[0], actual[0])
        assert np.array_equal(expected[1], actual[1])

        _, sequence = generate(self.config, str(path), self.frames, self.skeleton)
        assert sequence.num_frames == 9

    def test_config_mismatch_rejected(self, tmp_path):
        """
        测试权重与配置结构不一致
        """
        path = tmp_path / 'generator.npz'
        self.generator.save(str(path))
        with pytest.raises(ConfigurationError):
            MotionGenerator.from_weights(str(path), GeneratorSettings(**dict(SMALL, layers=2)))

    def test_missing_weights_file(self, tmp_path):
        """
        测试权重文件不存在
        """
        with pytest.raises(DataValidationError):
            MotionGenerator.from_weights(str(tmp_path / 'missing.npz'))

    def test_unsupported_version_rejected(self, tmp_path):
        """
        测试权重文件版本
        """
        path = tmp_path / 'generator.npz'
        np.savez(path, __version__=np.array(99), __config__=np.array('{}'))
        with pytest.raises(DataValidationError):
            MotionGenerator.read_weights_file(str(path))
