# 命令行测试用例

import json

import numpy as np
import pytest

from ai.models.motion_generator import MotionGenerator
from app import build_parser, main
from common.errors import EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE
from config.pipeline_config import GeneratorSettings, HandRefineSettings, PipelineConfig, SynthSettings, save_config
from data.collectors.synthetic_collector import SyntheticCollector
from data.storage.motion_storage import load_motion, save_cloud, save_motion


def small_config():
    return PipelineConfig(
        generator=GeneratorSettings(layers=1, model_dim=16, heads=2, ff_dim=32, T=8, bootstrap_steps=2),
        hand_refine=HandRefineSettings(iterations=2, window=4),
        synth=SynthSettings(count=2)
    )


class TestCommandLine:
    """
    命令行测试类
    """

    @pytest.fixture(autouse=True)
    def workspace(self, tmp_path):
        """
        准备配置文件、合成场景与零初始化权重
        """
        self.tmp = tmp_path
        self.config = small_config()
        self.config_path = tmp_path / 'config.json'
        save_config(self.config, self.config_path)
        collector = SyntheticCollector(self.config.synth, T=self.config.generator.T)
        self.scene = collector.collect(seed=0, count=1)[0]
        self.motion_path = tmp_path / 'truth.motion.json'
        save_motion(self.motion_path, self.scene.sequence, self.scene.skeleton)
        self.cloud_path = tmp_path / 'object.cloud.txt'
        save_cloud(self.cloud_path, self.scene.cloud)
        self.weights_path = tmp_path / 'generator.npz'
        MotionGenerator(self.config.generator).save(str(self.weights_path))

    def _run(self, *argv):
        return main(list(argv) + ['--config', str(self.config_path)])

    def test_help_lists_defaults(self, capsys):
        """
        测试子命令帮助中列出默认值
        """
        with pytest.raises(SystemExit) as excinfo:
            build_parser().parse_args(['refine-hand', '--help'])
        assert excinfo.value.code == 0
        out = capsys.readouterr().out
        assert 'hand_refine.alpha3 = 50.0' in out
        assert 'hand_refine.window = 15' in out

    def test_usage_errors_exit_one(self):
        """
        测试用法错误的退出码
        """
        for argv in ([], ['unknown'], ['smooth', '--input', 'a.json'], ['synth', '--output', 'x', '--count', '0'],
                     ['refine-feet', '--input', 'a', '--output', 'b', '--threshold', '1.5']):
            with pytest.raises(SystemExit) as excinfo:
                main(argv)
            assert excinfo.value.code == EXIT_USAGE

    def test_seed(self):
        """
        测试插值初始化命令
        """
        output = self.tmp / 'seeded.motion.json'
        assert self._run('seed', '--start', str(self.motion_path), '--frames', '4', '--output', str(output)) == EXIT_OK
        seeded, _ = load_motion(output)
        assert seeded.num_frames == 5
        assert np.array_equal(seeded.params[0], self.scene.start)
        assert np.array_equal(seeded.params[-1], self.scene.target)

    def test_generate_and_refine(self):
        """
        测试生成、平滑、下肢与手部后处理命令串联
        """
        generated = self.tmp / 'generated.motion.json'
        assert self._run('generate', '--input', str(self.motion_path), '--weights', str(self.weights_path),
                         '--output', str(generated)) == EXIT_OK
        smoothed = self.tmp / 'smoothed.motion.json'
        assert self._run('smooth', '--input', str(generated), '--output', str(smoothed)) == EXIT_OK
        feet = self.tmp / 'feet.motion.json'
        assert self._run('refine-feet', '--input', str(smoothed), '--output', str(feet)) == EXIT_OK
        hand = self.tmp / 'hand.motion.json'
        assert self._run('refine-hand', '--input', str(feet), '--cloud', str(self.cloud_path),
                         '--output', str(hand)) == EXIT_OK
        sequence, _ = load_motion(hand)
        assert sequence.num_frames == 9

    def test_evaluate(self):
        """
        测试评估命令：与自身比较时末帧误差为 0
        """
        report = self.tmp / 'report.json'
        code = self._run('evaluate', '--input', str(self.motion_path), '--reference', str(self.motion_path),
                         '--cloud', str(self.cloud_path), '--output', str(report))
        assert code == EXIT_OK
        records = json.loads(report.read_text(encoding='utf-8'))
        assert [r['name'] for r in records] == ['truth', 'aggregate']
        assert records[0]['end_mjd_body'] == 0.0
        assert records[0]['inter_v1'] is not None

    def test_evaluate_reference_count(self):
        """
        测试 --reference 数量与 --input 不一致
        """
        code = self._run('evaluate', '--input', str(self.motion_path), '--input', str(self.motion_path),
                         '--reference', str(self.motion_path), '--output', str(self.tmp / 'r.json'))
        assert code == EXIT_DATA

    def test_data_errors_exit_two(self):
        """
        测试数据错误的退出码
        """
        broken = self.tmp / 'broken.motion.json'
        broken.write_text('{\n  "format": "graspmotion.motion",\n', encoding='utf-8')
        assert self._run('smooth', '--input', str(broken), '--output', str(self.tmp / 'o.json')) == EXIT_DATA

        short = self.tmp / 'short.cloud.txt'
        short.write_text('0 0 0 0 1 0\n', encoding='utf-8')
        assert self._run('refine-hand', '--input', str(self.motion_path), '--cloud', str(short),
                         '--output', str(self.tmp / 'o.json')) == EXIT_DATA

        assert main(['smooth', '--input', str(self.motion_path), '--output', str(self.tmp / 'o.json'),
                     '--config', str(self.tmp / 'missing.json')]) == EXIT_DATA

    def test_synth(self):
        """
        测试合成语料命令
        """
        output = self.tmp / 'corpus'
        assert self._run('synth', '--count', '2', '--seed', '5', '--output', str(output)) == EXIT_OK
        assert sorted(p.name for p in output.glob('*.scene.json')) == ['scene_000.scene.json', 'scene_001.scene.json']
        assert len(list(output.glob('*.cloud.txt'))) == 2

    def test_train(self):
        """
        测试训练命令写出权重与损失轨迹
        """
        output = self.tmp / 'models'
        assert self._run('train', '--synthetic', '2', '--steps', '2', '--disable-loss', 'L4',
                         '--output', str(output)) == EXIT_OK
        assert (output / 'motion_generator.npz').exists()
        result = json.loads((output / 'training_result.json').read_text(encoding='utf-8'))
        assert result['config']['loss_weights']['l4'] == 0.0

    def test_pipeline(self):
        """
        测试流水线命令写出报告与指标文件
        """
        output = self.tmp / 'run'
        metrics = self.tmp / 'metrics.prom'
        code = self._run('pipeline', '--synthetic', '1', '--weights', str(self.weights_path), '--no-timing',
                         '--output', str(output), '--metrics-file', str(metrics))
        assert code == EXIT_OK
        records = json.loads((output / 'report.json').read_text(encoding='utf-8'))
        assert [r['stage'] for r in records if r['name'] == 'aggregate'] == ['raw', '+p1', '+p1+p2', '+p1+p2+p3']
        assert all(r['wall_time'] == 0.0 for r in records)
        assert 'graspmotion_stage_count_total' in metrics.read_text(encoding='utf-8')

    def test_pipeline_stage_failure(self):
        """
        测试阶段失败时以数值错误退出并保留失败标记
        """
        config = small_config()
        config.hand_refine.alpha1 = float('inf')
        save_config(config, self.config_path)
        output = self.tmp / 'run'
        code = self._run('pipeline', '--synthetic', '1', '--weights', str(self.weights_path), '--output', str(output))
        assert code == EXIT_NUMERICAL
        assert (output / 'scene_000.FAILED').exists()
