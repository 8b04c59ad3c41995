# 生成器训练测试用例

import json
import os

import numpy as np
import pytest

from ai.trainers.model_trainer import ModelTrainer
from common.errors import TrainingDivergenceError
from config.pipeline_config import GeneratorSettings, LossWeights, SynthSettings
from data.collectors.synthetic_collector import SyntheticCollector, training_samples

SMALL = dict(layers=1, model_dim=16, heads=2, ff_dim=32, T=8, batch_size=2, log_every=1)


def small_corpus(count=2, T=8, seed=0):
    collector = SyntheticCollector(SynthSettings(count=count), T=T)
    return training_samples(collector.collect(seed=seed, count=count))


class TestModelTrainer:
    """
    训练器测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.samples = small_corpus()
        self.config = GeneratorSettings(**SMALL, learning_rate=1e-3)

    def test_trace_columns(self):
        """
        测试损失轨迹的列与有限性
        """
        _, trace = ModelTrainer(self.config, seed=1).train(self.samples, steps=3, progress=False)
        assert list(trace.columns) == ['step', 'L1', 'L2', 'L3', 'L4', 'total']
        assert list(trace['step']) == [1, 2, 3]
        assert np.all(np.isfinite(trace[['L1', 'L2', 'L3', 'L4', 'total']].to_numpy()))

    def test_same_seed_same_trace(self):
        """
        测试相同种子得到相同的损失轨迹
        """
        _, first = ModelTrainer(self.config, seed=5).train(self.samples, steps=4, progress=False)
        _, second = ModelTrainer(self.config, seed=5).train(self.samples, steps=4, progress=False)
        assert first.equals(second)

    def test_loss_decreases(self):
        """
        测试训练使损失下降
        """
        _, trace = ModelTrainer(self.config, seed=2).train(self.samples, steps=40, progress=False)
        assert trace['total'].iloc[-5:].mean() < trace['total'].iloc[0]

    def test_disabled_term_does_not_contribute(self):
        """
        测试关闭 L3、L4 后总损失只含 L1 与 L2
        """
        config = self.config.ablate('L3', 'L4')
        _, trace = ModelTrainer(config, seed=1).train(self.samples, steps=2, progress=False)
        expected = trace['L1'] + config.loss_weights.l2 * trace['L2']
        assert np.allclose(trace['total'], expected, rtol=1e-5)

    def test_train_safe_writes_outputs(self, tmp_path):
        """
        测试训练结果、权重与损失轨迹文件
        """
        result = ModelTrainer(self.config, seed=1).train_safe(self.samples, steps=2, output_dir=str(tmp_path),
                                                              progress=False)
        assert result['success'] is True
        assert os.path.exists(result['weights_path'])
        assert os.path.exists(result['trace_path'])
        with open(tmp_path / 'training_result.json', encoding='utf-8') as f:
            assert json.load(f)['steps'] == 2

    def test_divergence_reported(self, tmp_path):
        """
        测试损失非有限时训练失败并保留轨迹
        """
        config = self.config.model_copy(update={'loss_weights': LossWeights(l3=float('inf'))})
        trainer = ModelTrainer(config, seed=1)
        with pytest.raises(TrainingDivergenceError) as excinfo:
            trainer.train(self.samples, steps=3, progress=False)
        assert len(excinfo.value.trace) == 1

        result = trainer.train_safe(self.samples, steps=3, output_dir=str(tmp_path), progress=False)
        assert result['success'] is False
        assert isinstance(result['exception'], TrainingDivergenceError)
        assert os.path.exists(result['trace_path'])

    @pytest.mark.slow
    def test_overfits_single_sequence(self):
        """
        测试单条序列可过拟合到 5 毫米以内
        """
        samples = small_corpus(count=1)
        config = GeneratorSettings(**dict(SMALL, model_dim=64, ff_dim=128, layers=2, batch_size=1),
                                   learning_rate=1e-3)
        trainer = ModelTrainer(config, seed=0)
        generator, _ = trainer.train(samples, steps=3000, progress=False)
        errors = trainer.reconstruction_error(generator, samples)
        assert errors['body_mm'].iloc[0] < 5.0
        assert errors['rhand_mm'].iloc[0] < 5.0

    @pytest.mark.slow
    def test_single_sample_loss_falls_below_tenth(self):
        """
        测试单样本语料在 2000 步内损失降到初始值的 10% 以下（默认学习率）
        """
        # 准备
        samples = small_corpus(count=1, T=GeneratorSettings().T)
        trainer = ModelTrainer(GeneratorSettings(), seed=0)

        # 执行
        _, trace = trainer.train(samples, steps=2000, progress=False)

        # 验证
        assert trace['total'].min() < 0.1 * trace['total'].iloc[0]

    @pytest.mark.slow
    def test_overfits_eight_sequences(self):
        """
        测试默认小规模配置在 5000 步内把 8 条合成序列重建到 5 毫米以内
        """
        # 准备
        config = GeneratorSettings()
        samples = small_corpus(count=8, T=config.T, seed=3)
        trainer = ModelTrainer(config, seed=0)

        # 执行
        generator, _ = trainer.train(samples, steps=5000, progress=False)

        # 验证
        errors = trainer.reconstruction_error(generator, samples)
        assert len(errors) == 8
        assert errors['body_mm'].max() < 5.0
        assert errors['rhand_mm'].max() < 5.0
