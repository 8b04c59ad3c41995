# Motion Predictor
# 动作生成：插值序列 + 生成器残差 -> 完整动作序列与触地概率

import logging
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from common.errors import ConfigurationError
from config.pipeline_config import GeneratorSettings
from kinematics.pose import POSE_DIM
from kinematics.skeleton import Skeleton
from motion.sequence import ExtendedFrame, MotionSequence, stack_tokens
from ..models.motion_generator import MotionGenerator


@dataclass(frozen=True, eq=False)
class GeneratorOutput:
    """
    生成器输出

    Attributes:
        delta_x: (T+1, 225) 姿态偏差
        contact: (T+1, 2) 左/右脚触地概率
    """
    delta_x: np.ndarray
    contact: np.ndarray


class MotionPredictor:
    """
    动作预测器
    在插值初始序列上叠加网络预测的 ΔX，端点帧保持为给定姿态
    """

    def __init__(self, generator: MotionGenerator, config=None):
        """
        初始化预测器

        Args:
            generator: 已加载权重的生成器
            config: 配置参数（fps）
        """
        self.generator = generator
        self.config = config or {}
        self.logger = logging.getLogger(__name__)
        self.fps = float(self.config.get('fps', generator.config.fps))

    def generate(self, seeded_frames: List[ExtendedFrame], skeleton: Skeleton) -> Tuple[GeneratorOutput, MotionSequence]:
        """
        生成动作序列

        Args:
            seeded_frames: T+1 个插值扩展帧
            skeleton: 骨架（提供骨长向量 k）

        Returns:
            (GeneratorOutput, MotionSequence)
        """
        expected = self.generator.num_frames
        if len(seeded_frames) != expected:
            raise ConfigurationError(f"generator is configured for {expected} frames, got {len(seeded_frames)}")
        if skeleton.num_joints - 1 != self.generator.num_bones:
            raise ConfigurationError(
                f"skeleton has {skeleton.num_joints - 1} bones, generator expects {self.generator.num_bones}"
            )

        tokens = stack_tokens(seeded_frames)
        delta_x, contact = self.generator.predict(tokens, skeleton.bone_lengths)
        contact = np.clip(contact, 0.0, 1.0)

        seeded = tokens[:, :POSE_DIM]
        params = seeded + delta_x
        # 端点帧（m = 0）恢复为给定姿态
        for i, frame in enumerate(seeded_frames):
            if frame.m == 0:
                params[i] = frame.x

        self.logger.debug(f"Generated {len(seeded_frames)} frames, max |dX| = {np.abs(delta_x).max():.6f}")
        return GeneratorOutput(delta_x=delta_x, contact=contact), MotionSequence(params, self.fps, contact)


def generate(config: GeneratorSettings, weights: Union[str, MotionGenerator], seeded_frames: List[ExtendedFrame],
             skeleton: Skeleton) -> Tuple[GeneratorOutput, MotionSequence]:
    """
    由配置、权重与插值序列生成动作

    Args:
        config: 生成器配置
        weights: 权重文件路径或已构建的生成器
        seeded_frames: 插值扩展帧
        skeleton: 骨架

    Returns:
        (GeneratorOutput, MotionSequence)
    """
    if isinstance(weights, MotionGenerator):
        generator = weights
    else:
        generator = MotionGenerator.from_weights(weights, config)
    return MotionPredictor(generator, {'fps': config.fps}).generate(seeded_frames, skeleton)
