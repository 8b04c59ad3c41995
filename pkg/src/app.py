# Main Application
# 命令行入口：seed / train / generate / smooth / refine-feet / refine-hand / evaluate / synth / pipeline

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from common.errors import EXIT_OK, EXIT_USAGE, ConfigurationError, GraspMotionError, exit_code_for
from config.pipeline_config import LOSS_TERMS, PipelineConfig, load_config

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
BUNDLED_SKELETON = Path(__file__).resolve().parent.parent / 'data' / 'skeletons' / 'default_skeleton.json'

DEFAULTS = PipelineConfig()


class ArgumentParser(argparse.ArgumentParser):
    """用法错误以退出码 1 结束"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def probability(value: str) -> float:
    number = float(value)
    if not 0.0 <= number <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {value}")
    return number


def configure_logging(level: str = 'INFO', log_file: Optional[str] = None):
    """
    配置根日志：stdout，可选文件
    """
    handlers = [logging.StreamHandler(sys.stdout)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT,
                        handlers=handlers, force=True)


def _defaults_epilog(*sections: str) -> str:
    dump = DEFAULTS.model_dump()
    lines = ['defaults:']
    for section in sections:
        for key, value in dump[section].items():
            lines.append(f"  {section}.{key} = {value}")
    return '\n'.join(lines)


def build_parser() -> ArgumentParser:
    """
    构建命令行解析器
    """
    common = ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None,
                        help=f"random seed (default: {DEFAULTS.pipeline.seed})")
    common.add_argument('--workers', type=positive_int, default=None,
                        help=f"parallel sequences (default: {DEFAULTS.pipeline.workers})")
    common.add_argument('--config', help="pipeline config JSON (every field required)")
    common.add_argument('--skeleton', help="skeleton JSON (default: bundled default skeleton)")
    common.add_argument('--log-file', help="also write the log to this file")
    common.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    common.add_argument('--metrics-file', help="write Prometheus metrics to this file on exit")
    common.add_argument('--no-timing', action='store_true', help="report wall_time as 0 (bitwise-stable reports)")

    parser = ArgumentParser(prog='graspmotion', description="Whole-body grasping motion generation and refinement")
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True
    formatter = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser('seed', parents=[common], help="linear interpolation between two poses",
                       epilog=_defaults_epilog('generator'), formatter_class=formatter)
    p.add_argument('--start', required=True, help="motion file; its first frame is the initial pose")
    p.add_argument('--target', help="motion file; its last frame is the target pose (default: --start)")
    p.add_argument('--frames', type=positive_int, default=None, help=f"T (default: {DEFAULTS.generator.T})")
    p.add_argument('--output', required=True)

    p = sub.add_parser('train', parents=[common], help="train the generator",
                       epilog=_defaults_epilog('generator', 'synth'), formatter_class=formatter)
    p.add_argument('--corpus', help="directory of motion files (default: synthetic corpus)")
    p.add_argument('--synthetic', type=positive_int, default=None,
                   help=f"synthetic corpus size (default: {DEFAULTS.synth.count})")
    p.add_argument('--steps', type=positive_int, default=None, help=f"(default: {DEFAULTS.generator.train_steps})")
    p.add_argument('--disable-loss', action='append', default=[], choices=list(LOSS_TERMS),
                   help="zero the weight of a loss term (repeatable)")
    p.add_argument('--output', default='./models')

    p = sub.add_parser('generate', parents=[common], help="refine a seeded motion with the generator",
                       epilog=_defaults_epilog('generator'), formatter_class=formatter)
    p.add_argument('--input', required=True, help="seeded motion file (T+1 frames)")
    p.add_argument('--weights', help="weights .npz (default: train a bootstrap model)")
    p.add_argument('--output', required=True)

    p = sub.add_parser('smooth', parents=[common], help="size-3 mean filter over the whole motion")
    p.add_argument('--input', required=True)
    p.add_argument('--output', required=True)

    p = sub.add_parser('refine-feet', parents=[common], help="remove foot skating",
                       epilog=_defaults_epilog('foot_refine'), formatter_class=formatter)
    p.add_argument('--input', required=True, help="motion file with contact probabilities")
    p.add_argument('--threshold', type=probability, default=None,
                   help=f"contact threshold (default: {DEFAULTS.foot_refine.contact_threshold})")
    p.add_argument('--output', required=True)

    p = sub.add_parser('refine-hand', parents=[common], help="remove hand-object interpenetration",
                       epilog=_defaults_epilog('hand_refine'), formatter_class=formatter)
    p.add_argument('--input', required=True)
    p.add_argument('--cloud', required=True, help="object cloud file (4096 oriented points)")
    p.add_argument('--output', required=True)

    p = sub.add_parser('evaluate', parents=[common], help="compute END-MJD, PSKL-J, INTER-VOLUME, SKATING",
                       epilog=_defaults_epilog('metrics'), formatter_class=formatter)
    p.add_argument('--input', action='append', required=True, help="generated motion (repeatable)")
    p.add_argument('--reference', action='append', default=[], help="ground-truth motion, one per --input")
    p.add_argument('--target', help="motion whose last frame is the target pose")
    p.add_argument('--cloud', help="object cloud for INTER-VOLUME")
    p.add_argument('--output', required=True, help="report JSON")

    p = sub.add_parser('synth', parents=[common], help="write a synthetic corpus of scenes",
                       epilog=_defaults_epilog('synth'), formatter_class=formatter)
    p.add_argument('--count', type=positive_int, default=None, help=f"(default: {DEFAULTS.synth.count})")
    p.add_argument('--output', required=True, help="output directory")

    p = sub.add_parser('pipeline', parents=[common], help="seed -> generate -> smooth -> refine -> evaluate",
                       epilog=_defaults_epilog('generator', 'foot_refine', 'hand_refine', 'metrics', 'pipeline'),
                       formatter_class=formatter)
    p.add_argument('--scene', action='append', default=[], help="scene file (repeatable)")
    p.add_argument('--synthetic', type=positive_int, default=None, help="number of synthetic scenes when no --scene")
    p.add_argument('--weights', help="weights .npz (default: train a bootstrap model)")
    p.add_argument('--output', default='./output', help="output directory")
    return parser


class GraspMotionApp:
    """
    命令行应用
    """

    def __init__(self, args: argparse.Namespace):
        """
        初始化应用

        Args:
            args: 解析后的命令行参数
        """
        self.args = args
        self.logger = logging.getLogger(__name__)
        self.config = load_config(args.config) if args.config else PipelineConfig()
        if args.seed is not None:
            self.config.pipeline.seed = args.seed
        if args.workers is not None:
            self.config.pipeline.workers = args.workers
        self.skeleton = self._load_skeleton()

    def _load_skeleton(self):
        from data.storage.motion_storage import load_skeleton
        from kinematics.skeleton import default_skeleton

        if self.args.skeleton:
            return load_skeleton(self.args.skeleton)
        if BUNDLED_SKELETON.exists():
            return load_skeleton(BUNDLED_SKELETON)
        return default_skeleton()

    @property
    def seed(self) -> int:
        return self.config.pipeline.seed

    def _generator(self, weights: Optional[str]):
        from ai.models.motion_generator import MotionGenerator
        from pipeline.pipeline_runner import bootstrap_generator

        if weights:
            return MotionGenerator.from_weights(weights, self.config.generator)
        return bootstrap_generator(self.config, self.seed, self.monitor)

    @property
    def monitor(self):
        from monitoring.monitoring import get_monitor
        return get_monitor()

    def run(self) -> int:
        """
        执行子命令

        Returns:
            退出码
        """
        handler = getattr(self, 'cmd_' + self.args.command.replace('-', '_'))
        self.logger.info(f"Running {self.args.command} (seed {self.seed})")
        return handler() or EXIT_OK

    def cmd_seed(self) -> int:
        from data.storage.motion_storage import load_motion, save_motion
        from motion.sequence import frames_to_sequence, seed_sequence

        start, skeleton = load_motion(self.args.start)
        target = load_motion(self.args.target, skeleton)[0] if self.args.target else start
        T = self.args.frames if self.args.frames is not None else self.config.generator.T
        frames = seed_sequence(skeleton, start.params[0], target.params[-1], T)
        save_motion(self.args.output, frames_to_sequence(frames, self.config.generator.fps), skeleton)
        self.logger.info(f"Seeded {T + 1} frames to {self.args.output}")

    def cmd_train(self) -> int:
        from ai.trainers.model_trainer import ModelTrainer
        from data.collectors.synthetic_collector import SyntheticCollector, training_samples
        from data.processors.training_processor import TrainingProcessor, TrainingSample
        from data.storage.motion_storage import load_motion

        if self.args.disable_loss:
            self.config.generator = self.config.generator.ablate(*self.args.disable_loss)
        if self.args.corpus:
            processor = TrainingProcessor({'contact_speed': self.config.synth.contact_speed})
            samples = []
            for path in sorted(Path(self.args.corpus).glob('*.motion.json')):
                sequence, skeleton = load_motion(path)
                if sequence.contact_probs is None:
                    sequence = processor.label(sequence, skeleton)
                samples.append(TrainingSample(sequence, skeleton))
        else:
            collector = SyntheticCollector(self.config.synth, T=self.config.generator.T, fps=self.config.generator.fps)
            count = self.args.synthetic or self.config.synth.count
            samples = training_samples(collector.collect(seed=self.seed, count=count, skeleton=self.skeleton))

        trainer = ModelTrainer(self.config.generator, seed=self.seed, model_save_path=self.args.output)
        result = trainer.train_safe(samples, steps=self.args.steps, monitor=self.monitor)
        if not result['success']:
            return exit_code_for(result['exception'])
        self.logger.info(f"Training finished: loss {result['initial_loss']:.6f} -> {result['final_loss']:.6f}")

    def cmd_generate(self) -> int:
        from ai.predictors.motion_predictor import MotionPredictor
        from data.storage.motion_storage import load_motion, save_motion
        from motion.sequence import seed_sequence

        seeded, skeleton = load_motion(self.args.input)
        frames = seed_sequence(skeleton, seeded.params[0], seeded.params[-1], seeded.num_frames - 1)
        generator = self._generator(self.args.weights)
        _, sequence = MotionPredictor(generator, {'fps': seeded.fps}).generate(frames, skeleton)
        save_motion(self.args.output, sequence, skeleton)

    def cmd_smooth(self) -> int:
        from data.storage.motion_storage import load_motion, save_motion
        from pipeline.pipeline_runner import smooth_sequence

        sequence, skeleton = load_motion(self.args.input)
        save_motion(self.args.output, smooth_sequence(sequence), skeleton)

    def cmd_refine_feet(self) -> int:
        from data.storage.motion_storage import load_motion, save_motion
        from refinement.foot.foot_refiner import FootRefiner

        if self.args.threshold is not None:
            self.config.foot_refine.contact_threshold = self.args.threshold
        sequence, skeleton = load_motion(self.args.input)
        save_motion(self.args.output, FootRefiner(self.config.foot_refine).refine(sequence, skeleton), skeleton)

    def cmd_refine_hand(self) -> int:
        from data.storage.motion_storage import load_cloud, load_motion, save_motion
        from refinement.hand.hand_refiner import HandRefiner

        sequence, skeleton = load_motion(self.args.input)
        cloud = load_cloud(self.args.cloud)
        refiner = HandRefiner(self.config.hand_refine)
        refined = refiner.refine(sequence, skeleton, cloud)
        if refiner.trace:
            self.monitor.set_refinement_energy(
                {k: v for k, v in refiner.trace[-1].items() if k not in ('iteration', 'step')}
            )
        save_motion(self.args.output, refined, skeleton)

    def cmd_evaluate(self) -> int:
        from data.storage.motion_storage import load_cloud, load_motion
        from metrics.motion_evaluator import MotionEvaluator, save_reports

        if self.args.reference and len(self.args.reference) != len(self.args.input):
            raise ConfigurationError("--reference must be given once per --input")
        evaluator = MotionEvaluator(self.config.metrics)
        cloud = load_cloud(self.args.cloud) if self.args.cloud else None
        reports, sequences, references, skeletons = [], [], [], []
        for index, path in enumerate(self.args.input):
            sequence, skeleton = load_motion(path)
            reference = load_motion(self.args.reference[index], skeleton)[0] if self.args.reference else None
            target = load_motion(self.args.target, skeleton)[0].params[-1] if self.args.target else None
            reports.append(evaluator.evaluate(sequence, skeleton, target=target, reference=reference, cloud=cloud,
                                              name=Path(path).name.split('.')[0]))
            sequences.append(sequence)
            references.append(reference)
            skeletons.append(skeleton)
        pskl = evaluator.corpus_pskl(sequences, references, skeletons) if self.args.reference else None
        reports.append(evaluator.aggregate(reports, pskl=pskl))
        save_reports(reports, self.args.output)
        self.logger.info(f"Wrote {len(reports)} records to {self.args.output}")

    def cmd_synth(self) -> int:
        from data.collectors.synthetic_collector import SyntheticCollector

        collector = SyntheticCollector(self.config.synth, T=self.config.generator.T, fps=self.config.generator.fps)
        scenes = collector.collect(seed=self.seed, count=self.args.count, skeleton=self.skeleton)
        paths = collector.write(scenes, self.args.output)
        self.logger.info(f"Wrote {len(paths)} scenes to {self.args.output}")

    def cmd_pipeline(self) -> int:
        from pipeline.pipeline_runner import PipelineRunner, default_inputs, load_scene_input

        if self.args.scene:
            items = [load_scene_input(path, self.config, self.skeleton) for path in self.args.scene]
        else:
            items = default_inputs(self.config, self.args.synthetic or 1, self.seed, self.skeleton)
        generator = self._generator(self.args.weights)
        runner = PipelineRunner(self.config, output_dir=self.args.output, generator=generator,
                                monitor=self.monitor, record_time=not self.args.no_timing)
        summary = runner.run(items)
        self.logger.info(f"Report written to {summary['report_path']}")
        if not summary['success']:
            failed = next(r for r in summary['results'] if not r['success'])
            return exit_code_for(failed['exception'])


def main(argv: Optional[List[str]] = None) -> int:
    """
    命令行主函数

    Returns:
        退出码：0 成功，1 用法错误，2 数据校验错误，3 数值失败
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_file)
    logger = logging.getLogger(__name__)
    code = EXIT_OK
    try:
        code = GraspMotionApp(args).run()
    except GraspMotionError as e:
        logger.error(f"Error running {args.command}: {str(e)}")
        code = exit_code_for(e)
    finally:
        if args.metrics_file:
            from monitoring.monitoring import get_monitor
            get_monitor().write(args.metrics_file)
    return code


if __name__ == "__main__":
    sys.exit(main())
