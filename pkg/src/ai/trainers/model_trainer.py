# Model Trainer Module
# 生成器训练：Adam 优化总损失，逐步记录损失轨迹，固定种子下可复现

import json
import logging
import math
import os
from datetime import datetime
from typing import List, Optional

import numpy as np
import pandas as pd
import tensorflow as tf
from tqdm import tqdm

from common.errors import GraspMotionError, TrainingDivergenceError
from config.pipeline_config import GeneratorSettings
from data.processors.training_processor import TrainingProcessor, TrainingSample
from kinematics.differentiable import skeleton_constants
from kinematics.forward_kinematics import forward_kinematics
from kinematics.pose import POSE_DIM
from metrics.end_mjd import mean_joint_distance
from motion.sequence import seed_sequence
from ..losses.motion_losses import LOSS_COLUMNS, MotionLoss
from ..models.motion_generator import MotionGenerator
from ..predictors.motion_predictor import MotionPredictor


def set_global_determinism(seed: int):
    """固定 Python/NumPy/TensorFlow 随机种子并启用确定性算子"""
    tf.keras.utils.set_random_seed(int(seed))
    tf.config.experimental.enable_op_determinism()


class ModelTrainer:
    """
    模型训练器
    用于训练动作生成器
    """

    def __init__(self, config: GeneratorSettings = None, seed: int = 0, model_save_path: str = './models'):
        """
        初始化模型训练器

        Args:
            config: 生成器配置
            seed: 随机种子
            model_save_path: 权重与训练结果保存目录
        """
        self.config = config or GeneratorSettings()
        self.logger = logging.getLogger(__name__)
        self.seed = int(seed)

        # 训练参数
        self.steps = self.config.train_steps
        self.batch_size = self.config.batch_size
        self.learning_rate = self.config.learning_rate

        self.model_save_path = model_save_path
        self.processor = TrainingProcessor({'num_frames': self.config.T + 1})

    def train(self, samples: List[TrainingSample], steps: Optional[int] = None, generator: MotionGenerator = None,
              monitor=None, progress: bool = True):
        """
        训练生成器

        Args:
            samples: 训练样本（非空，帧数均为 T+1）
            steps: 训练步数（默认取配置）
            generator: 继续训练的生成器；为空时按种子新建
            monitor: 可选的 PipelineMonitor
            progress: 是否显示进度条

        Returns:
            (generator, 损失轨迹 DataFrame，列为 step,L1,L2,L3,L4,total)
        """
        steps = int(steps or self.steps)
        set_global_determinism(self.seed)
        batch = self.processor.process(samples)
        num_bones = batch['bone_lengths'].shape[1]
        if generator is None:
            generator = MotionGenerator(self.config, num_bones=num_bones)

        constants = skeleton_constants(samples[0].skeleton)
        loss_fn = MotionLoss(self.config.loss_weights, constants['parents'], constants['wrist'], constants['fingers'])
        optimizer = tf.keras.optimizers.Adam(learning_rate=self.learning_rate)
        model = generator.model

        @tf.function
        def train_step(tokens, bone_lengths, params, contacts, offsets):
            with tf.GradientTape() as tape:
                delta, contact = model((tokens, bone_lengths), training=True)
                pred = tokens[..., :POSE_DIM] + delta
                terms = loss_fn(pred, contact, params, contacts, offsets)
            variables = model.trainable_variables
            gradients = tape.gradient(terms['total'], variables)
            optimizer.apply_gradients(
                [(g, v) for g, v in zip(gradients, variables) if g is not None]
            )
            return terms

        rng = np.random.default_rng(self.seed)
        count = len(samples)
        size = min(self.batch_size, count)
        trace = []
        self.logger.info(f"Training generator on {count} samples for {steps} steps (batch {size})")

        for step in tqdm(range(1, steps + 1), desc='train', disable=not progress):
            index = np.sort(rng.choice(count, size=size, replace=False)) if size < count else np.arange(count)
            terms = train_step(*(tf.constant(batch[key][index]) for key in
                                 ('tokens', 'bone_lengths', 'params', 'contacts', 'offsets')))
            row = {'step': step}
            row.update({name: float(terms[name].numpy()) for name in LOSS_COLUMNS})
            trace.append(row)
            if not math.isfinite(row['total']):
                self.logger.error(f"Training diverged at step {step}: {row}")
                raise TrainingDivergenceError(f"non-finite training loss at step {step}", trace=trace)
            if monitor is not None:
                monitor.set_training_loss(row)
            if step == 1 or step % self.config.log_every == 0 or step == steps:
                self.logger.info(f"step {step}: total={row['total']:.6f} L1={row['L1']:.6f} "
                                 f"L2={row['L2']:.6f} L3={row['L3']:.6f} L4={row['L4']:.6f}")

        return generator, pd.DataFrame(trace, columns=('step',) + LOSS_COLUMNS)

    def reconstruction_error(self, generator: MotionGenerator, samples: List[TrainingSample]):
        """
        训练集重建误差：生成序列与真值逐帧关节平均距离（毫米）

        Returns:
            DataFrame，每个样本一行：body_mm, rhand_mm
        """
        predictor = MotionPredictor(generator, {'fps': self.config.fps})
        rows = []
        for sample in samples:
            sequence, skeleton = sample.sequence, sample.skeleton
            frames = seed_sequence(skeleton, sequence.params[0], sequence.params[-1], sequence.num_frames - 1)
            _, generated = predictor.generate(frames, skeleton)
            body, hand = mean_joint_distance(
                forward_kinematics(skeleton, generated.params), forward_kinematics(skeleton, sequence.params)
            )
            rows.append({'body_mm': body, 'rhand_mm': hand})
        return pd.DataFrame(rows)

    def train_safe(self, samples: List[TrainingSample], steps: Optional[int] = None, output_dir: str = None,
                   monitor=None, progress: bool = True):
        """
        训练并保存权重与损失轨迹

        Returns:
            训练结果字典
        """
        output_dir = output_dir or self.model_save_path
        trace_path = os.path.join(output_dir, 'loss_trace.csv')
        try:
            os.makedirs(output_dir, exist_ok=True)
            generator, trace = self.train(samples, steps=steps, monitor=monitor, progress=progress)
            weights_path = os.path.join(output_dir, f"{generator.model_name}.npz")
            generator.save(weights_path)
            trace.to_csv(trace_path, index=False)

            training_result = {
                'success': True,
                'steps': int(len(trace)),
                'initial_loss': float(trace['total'].iloc[0]),
                'final_loss': float(trace['total'].iloc[-1]),
                'weights_path': weights_path,
                'trace_path': trace_path,
                'seed': self.seed,
                'config': self.config.model_dump(),
                'timestamp': datetime.now().isoformat()
            }
            result_path = os.path.join(output_dir, 'training_result.json')
            with open(result_path, 'w', encoding='utf-8') as f:
                json.dump(training_result, f, ensure_ascii=False, indent=2)
            return training_result

        except GraspMotionError as e:
            self.logger.error(f"Error training generator: {str(e)}")
            if isinstance(e, TrainingDivergenceError) and e.trace:
                pd.DataFrame(e.trace, columns=('step',) + LOSS_COLUMNS).to_csv(trace_path, index=False)
            return {
                'success': False,
                'error': str(e),
                'exception': e,
                'stage': 'train',
                'trace_path': trace_path,
                'timestamp': datetime.now().isoformat()
            }

