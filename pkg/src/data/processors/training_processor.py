# Training Processor
# 训练样本：触地标签、样本校验与批次张量组装

import logging
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from common.errors import DataValidationError
from kinematics.forward_kinematics import forward_kinematics
from kinematics.skeleton import Skeleton
from metrics.skating import foot_speeds
from motion.sequence import MotionSequence, extend_with_joints, seed_interpolation, stack_tokens


class DataProcessor:
    """
    数据处理器基类
    """

    def __init__(self, config=None):
        """
        初始化数据处理器

        Args:
            config: 配置参数
        """
        self.config = config or {}
        self.logger = logging.getLogger(__name__)

    def process(self, data):
        """
        处理数据的核心方法，子类必须实现
        """
        raise NotImplementedError("Subclass must implement process method")

    def validate(self, data):
        """
        验证数据

        Returns:
            bool: 数据是否有效
        """
        if data is None or len(data) == 0:
            return False
        return True


@dataclass(frozen=True, eq=False)
class TrainingSample:
    """
    训练样本：带 0/1 触地标签的真值动作序列与其骨架
    """
    sequence: MotionSequence
    skeleton: Skeleton

    def __post_init__(self):
        contact = self.sequence.contact_probs
        if contact is None:
            raise DataValidationError("training sequences need per-frame contact labels")
        if not np.all((contact == 0) | (contact == 1)):
            raise DataValidationError("training contact labels must be 0 or 1")

    @property
    def num_frames(self) -> int:
        return self.sequence.num_frames


def label_contacts(positions, foot_joints, fps: float, speed_threshold: float = 0.01) -> np.ndarray:
    """
    按脚关节速度生成触地标签

    帧 i 的速度取其前后两段位移速度的较大值，低于阈值即标记为触地。

    Args:
        positions: (F, J, 3) 关节位置
        foot_joints: (左脚, 右脚) 关节索引
        fps: 帧率
        speed_threshold: 速度阈值 (m/s)

    Returns:
        (F, 2) 的 0/1 标签
    """
    speeds = foot_speeds(positions, foot_joints, fps)
    padded = np.concatenate([speeds[:1], speeds, speeds[-1:]], axis=0)
    frame_speed = np.maximum(padded[:-1], padded[1:])
    return (frame_speed < speed_threshold).astype(np.float64)


class TrainingProcessor(DataProcessor):
    """
    训练数据处理器
    把 TrainingSample 列表组装为网络输入与监督张量
    """

    def __init__(self, config=None):
        super().__init__(config)
        self.num_frames = self.config.get('num_frames')
        self.contact_speed = self.config.get('contact_speed', 0.01)

    def label(self, sequence: MotionSequence, skeleton: Skeleton) -> MotionSequence:
        """为序列补充基于速度的触地标签"""
        feet = skeleton.indices(['left_foot', 'right_foot'])
        labels = label_contacts(forward_kinematics(skeleton, sequence.params), feet, sequence.fps, self.contact_speed)
        return sequence.with_contacts(labels)

    def validate(self, data):
        if not super().validate(data):
            return False
        lengths = {sample.num_frames for sample in data}
        if len(lengths) != 1:
            return False
        return self.num_frames is None or lengths == {self.num_frames}

    def process(self, data: List[TrainingSample]) -> Dict[str, np.ndarray]:
        """
        组装批次

        Args:
            data: 训练样本

        Returns:
            字典：tokens (N, F, 337)、bone_lengths (N, K)、params (N, F, 225)、
            contacts (N, F, 2)、offsets (N, 1, K, 3)，均为 float32
        """
        if not self.validate(data):
            raise DataValidationError(
                f"training corpus must be nonempty with equal sequence lengths"
                + (f" of {self.num_frames} frames" if self.num_frames else '')
            )
        tokens, bones, params, contacts, offsets = [], [], [], [], []
        for sample in data:
            sequence, skeleton = sample.sequence, sample.skeleton
            seeded = seed_interpolation(
                extend_with_joints(skeleton, sequence.params[0]),
                extend_with_joints(skeleton, sequence.params[-1]),
                sequence.num_frames - 1
            )
            tokens.append(stack_tokens(seeded))
            bones.append(skeleton.bone_lengths)
            params.append(sequence.params)
            contacts.append(sequence.contact_probs)
            offsets.append(skeleton.offsets[None])
        batch = {
            'tokens': np.stack(tokens),
            'bone_lengths': np.stack(bones),
            'params': np.stack(params),
            'contacts': np.stack(contacts),
            'offsets': np.stack(offsets)
        }
        self.logger.debug(f"Assembled training batch of {len(data)} samples")
        return {key: value.astype(np.float32) for key, value in batch.items()}
