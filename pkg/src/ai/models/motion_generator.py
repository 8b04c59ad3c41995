# Motion Generator
# 生成器模型：包装 MotionTransformer，负责构建、前向计算与权重读写

import numpy as np
import tensorflow as tf

from common.errors import ConfigurationError
from config.pipeline_config import GeneratorSettings
from ..utils.base_model import BaseModel
from .motion_transformer import TOKEN_DIM, MotionTransformer


class MotionGenerator(BaseModel):
    """
    Transformer 动作生成器
    """

    def __init__(self, config: GeneratorSettings = None, num_bones: int = 36):
        """
        初始化生成器

        Args:
            config: 生成器配置
            num_bones: 骨长向量 k 的维度
        """
        super().__init__(config or GeneratorSettings())
        self.model_name = 'motion_generator'
        self.num_bones = int(num_bones)
        self.build_model()

    @property
    def num_frames(self) -> int:
        return self.config.T + 1

    def build_model(self):
        """
        构建并初始化网络（用全零输入触发变量创建）
        """
        self.model = MotionTransformer(
            layers=self.config.layers,
            model_dim=self.config.model_dim,
            heads=self.config.heads,
            ff_dim=self.config.ff_dim,
            max_frames=self.num_frames
        )
        self.model((tf.zeros((1, self.num_frames, TOKEN_DIM)), tf.zeros((1, self.num_bones))))
        self.logger.debug(f"Built generator with {self.model.count_params()} parameters")
        return self.model

    def config_dict(self):
        """权重文件中记录的结构参数"""
        return {
            'layers': self.config.layers,
            'model_dim': self.config.model_dim,
            'heads': self.config.heads,
            'ff_dim': self.config.ff_dim,
            'T': self.config.T,
            'num_bones': self.num_bones
        }

    def forward(self, tokens, bone_lengths, training=False):
        """
        前向计算

        Args:
            tokens: (B, T+1, 337) 帧 token
            bone_lengths: (B, K) 骨长

        Returns:
            (delta, contact)：(B, T+1, 225) 与 (B, T+1, 2)
        """
        return self.model((tokens, bone_lengths), training=training)

    def predict(self, tokens, bone_lengths):
        """
        单条序列推理

        Args:
            tokens: (T+1, 337)
            bone_lengths: (K,)

        Returns:
            (delta_x, contact)，float64 numpy 数组
        """
        tokens = np.asarray(tokens, dtype=np.float32)
        bone_lengths = np.asarray(bone_lengths, dtype=np.float32)
        if tokens.shape != (self.num_frames, TOKEN_DIM):
            raise ConfigurationError(
                f"generator expects {self.num_frames} frame tokens of size {TOKEN_DIM}, got {tokens.shape}"
            )
        if bone_lengths.shape != (self.num_bones,):
            raise ConfigurationError(f"generator expects {self.num_bones} bone lengths, got {bone_lengths.shape}")
        delta, contact = self.forward(tokens[None], bone_lengths[None])
        return delta.numpy()[0].astype(np.float64), contact.numpy()[0].astype(np.float64)

    def _named_weights(self):
        return [(getattr(v, 'path', v.name), v.numpy()) for v in self.model.weights]

    def _assign_weights(self, arrays):
        current = self.model.get_weights()
        if len(arrays) != len(current):
            raise ConfigurationError(f"weights file holds {len(arrays)} tensors, model has {len(current)}")
        for index, (loaded, expected) in enumerate(zip(arrays, current)):
            if loaded.shape != expected.shape:
                raise ConfigurationError(
                    f"weight tensor {index} has shape {loaded.shape}, expected {expected.shape}"
                )
        self.model.set_weights(arrays)

    @classmethod
    def from_weights(cls, path, config: GeneratorSettings = None) -> 'MotionGenerator':
        """
        按权重文件中记录的结构构建生成器并加载权重

        Args:
            path: .npz 权重文件
            config: 可选的生成器配置；结构字段必须与权重文件一致

        Returns:
            MotionGenerator
        """
        stored, _ = cls.read_weights_file(path)
        architecture = {k: stored[k] for k in ('layers', 'model_dim', 'heads', 'ff_dim', 'T') if k in stored}
        if config is None:
            config = GeneratorSettings(**architecture)
        else:
            mismatched = [k for k, v in architecture.items() if getattr(config, k) != v]
            if mismatched:
                raise ConfigurationError(f"weights do not match generator config fields: {mismatched}")
        generator = cls(config, num_bones=int(stored.get('num_bones', 36)))
        generator.load(path)
        return generator
