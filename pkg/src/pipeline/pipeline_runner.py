# Pipeline Runner
# 端到端流程：插值初始化 -> 生成 -> 平滑 -> 下肢后处理 -> 手部后处理 -> 评估

import logging
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ai.models.motion_generator import MotionGenerator
from ai.predictors.motion_predictor import MotionPredictor
from ai.trainers.model_trainer import ModelTrainer
from common.errors import GraspMotionError, StageFailedError
from config.pipeline_config import PipelineConfig
from data.collectors.synthetic_collector import SyntheticCollector, SyntheticScene, object_cloud, training_samples
from data.storage.motion_storage import StorageManager, load_cloud, load_motion, load_scene
from data.utils.worker_pool import WorkerPool
from kinematics.skeleton import Skeleton, default_skeleton
from metrics.motion_evaluator import MetricsReport, MotionEvaluator, save_reports
from monitoring.monitoring import get_monitor
from motion.filters import mean_filter3
from motion.sequence import MotionSequence, seed_sequence
from refinement.foot.foot_refiner import FootRefiner
from refinement.hand.hand_refiner import HandRefiner
from refinement.hand.object_cloud import ObjectCloud

STAGES = ('seed', 'generate', 'smooth', 'refine-feet', 'refine-hand', 'evaluate')
STAGE_TAGS = {'smooth': 'p1', 'refine-feet': 'p2', 'refine-hand': 'p3'}


@dataclass(frozen=True, eq=False)
class PipelineInput:
    """
    一条待处理的输入：初始姿态、目标姿态、物体点云，可选的真值动作
    """
    name: str
    skeleton: Skeleton
    start: np.ndarray
    target: np.ndarray
    cloud: Optional[ObjectCloud] = None
    reference: Optional[MotionSequence] = None

    @classmethod
    def from_scene(cls, scene: SyntheticScene) -> 'PipelineInput':
        return cls(scene.name, scene.skeleton, scene.start, scene.target, scene.cloud, scene.sequence)


def smooth_sequence(sequence: MotionSequence) -> MotionSequence:
    """
    整段序列所有姿态参数做大小为 3 的均值滤波（首尾帧不变）
    """
    return sequence.with_params(mean_filter3(sequence.params))


def stage_label(applied: Sequence[str]) -> str:
    """
    已执行的后处理阶段 -> 报告阶段名（raw, +p1, +p1+p2, ...）
    """
    tags = [STAGE_TAGS[stage] for stage in applied if stage in STAGE_TAGS]
    return 'raw' if not tags else '+' + '+'.join(tags)


def load_scene_input(path, config: PipelineConfig, skeleton: Optional[Skeleton] = None) -> PipelineInput:
    """
    读取场景文件

    场景给出 start_motion（及可选的 target_motion、cloud）时直接使用这些文件，
    否则由合成采集器按场景种子生成初始/目标姿态与点云。
    """
    spec = load_scene(path)
    name = Path(path).name.split('.')[0]
    collector = SyntheticCollector(config.synth, T=config.generator.T, fps=config.generator.fps)
    if spec.start_motion is None:
        scene = collector.realize(spec, skeleton, name=name)
        return PipelineInput.from_scene(scene)

    sequence, motion_skeleton = load_motion(spec.resolve('start_motion'), skeleton)
    target = sequence.params[-1]
    if spec.target_motion is not None:
        target = load_motion(spec.resolve('target_motion'), motion_skeleton)[0].params[-1]
    if spec.cloud is not None:
        cloud = load_cloud(spec.resolve('cloud'))
    elif spec.center is not None:
        cloud = object_cloud(spec.shape, spec.size, spec.center)
    else:
        cloud = None
    return PipelineInput(name, motion_skeleton, sequence.params[0], target, cloud, sequence)


def bootstrap_generator(config: PipelineConfig, seed: int, monitor=None) -> MotionGenerator:
    """
    没有给出权重时，在合成语料上做一次短时、确定性的训练
    """
    logger = logging.getLogger(__name__)
    logger.warning(f"No generator weights given; training a bootstrap model for "
                   f"{config.generator.bootstrap_steps} steps (seed {seed})")
    collector = SyntheticCollector(config.synth, T=config.generator.T, fps=config.generator.fps)
    scenes = collector.collect(seed=seed, count=config.synth.count)
    trainer = ModelTrainer(config.generator, seed=seed)
    generator, _ = trainer.train(training_samples(scenes), steps=config.generator.bootstrap_steps,
                                 monitor=monitor, progress=False)
    return generator


class PipelineRunner:
    """
    流水线执行器
    每条输入内部按阶段顺序执行，多条输入可并行；每个阶段的动作文件都会写出
    """

    def __init__(self, config: PipelineConfig = None, output_dir='./output', generator: MotionGenerator = None,
                 monitor=None, record_time: bool = True):
        """
        初始化流水线

        Args:
            config: 流水线配置
            output_dir: 输出目录
            generator: 生成器；为空时在首次运行前训练自举模型
            monitor: PipelineMonitor
            record_time: 是否在报告中记录耗时（关闭时为 0，便于逐位比对）
        """
        self.config = config or PipelineConfig()
        self.logger = logging.getLogger(__name__)
        self.storage = StorageManager({'output_dir': output_dir})
        self.generator = generator
        self.monitor = monitor or get_monitor()
        self.record_time = record_time
        self.evaluator = MotionEvaluator(self.config.metrics)

    def ensure_generator(self) -> MotionGenerator:
        if self.generator is None:
            self.generator = bootstrap_generator(self.config, self.config.pipeline.seed, self.monitor)
        return self.generator

    def _timed(self, stage: str, func, *args):
        start = time.perf_counter()
        success = False
        try:
            result = func(*args)
            success = True
            return result
        finally:
            self.monitor.record_stage(stage, success, time.perf_counter() - start)

    def _report(self, item: PipelineInput, sequence: MotionSequence, label: str, elapsed: float) -> MetricsReport:
        return self.evaluator.evaluate(
            sequence, item.skeleton, target=item.target, reference=item.reference, cloud=item.cloud,
            wall_time=elapsed if self.record_time else 0.0, name=item.name, stage=label
        )

    def run_one(self, item: PipelineInput) -> Dict[str, Any]:
        """
        处理一条输入

        Returns:
            结果字典：success, stage（失败时为出错阶段）, reports, files, error
        """
        generator = self.ensure_generator()
        cfg = self.config
        files: List[str] = []
        reports: List[MetricsReport] = []
        applied: List[str] = []
        sequences: List[MotionSequence] = []
        stage = 'seed'
        try:
            clock = time.perf_counter()
            frames = self._timed('seed', seed_sequence, item.skeleton, item.start, item.target, cfg.generator.T)
            stage = 'generate'
            predictor = MotionPredictor(generator, {'fps': cfg.generator.fps})
            _, sequence = self._timed('generate', predictor.generate, frames, item.skeleton)
            elapsed = time.perf_counter() - clock
            files.append(str(self.storage.store_motion(f"{item.name}.generate", sequence, item.skeleton)))
            stage = 'evaluate'
            reports.append(self._timed('evaluate', self._report, item, sequence, stage_label(applied), elapsed))
            sequences.append(sequence)

            steps = []
            if cfg.pipeline.apply_mean_filter:
                steps.append(('smooth', smooth_sequence, ()))
            steps.append(('refine-feet', FootRefiner(cfg.foot_refine).refine, (item.skeleton,)))
            if item.cloud is not None:
                hand_refiner = HandRefiner(cfg.hand_refine)
                steps.append(('refine-hand', hand_refiner.refine, (item.skeleton, item.cloud)))
            else:
                self.logger.warning(f"{item.name}: no object cloud, skipping hand refinement")

            for stage, func, extra in steps:
                clock = time.perf_counter()
                sequence = self._timed(stage, func, sequence, *extra)
                elapsed += time.perf_counter() - clock
                applied.append(stage)
                files.append(str(self.storage.store_motion(f"{item.name}.{stage}", sequence, item.skeleton)))
                if stage == 'refine-hand' and hand_refiner.trace:
                    self.monitor.set_refinement_energy(
                        {k: v for k, v in hand_refiner.trace[-1].items() if k not in ('iteration', 'step')}
                    )
                stage = 'evaluate'
                reports.append(self._timed('evaluate', self._report, item, sequence, stage_label(applied), elapsed))
                sequences.append(sequence)

            self.logger.info(f"{item.name}: pipeline finished ({len(reports)} reports)")
            return {
                'success': True,
                'name': item.name,
                'sequence': sequence,
                'reports': reports,
                'sequences': sequences,
                'files': files,
                'timestamp': datetime.now().isoformat()
            }

        except GraspMotionError as e:
            self.logger.error(f"Error running pipeline for {item.name} at stage {stage}: {str(e)}")
            return self._failure(item, stage, e, reports, files)
        except Exception as e:
            self.logger.error(f"Unexpected error running pipeline for {item.name} at stage {stage}: {str(e)}")
            return self._failure(item, stage, StageFailedError(stage, e), reports, files)

    def _failure(self, item: PipelineInput, stage: str, error: GraspMotionError,
                 reports: List[MetricsReport], files: List[str]) -> Dict[str, Any]:
        marker = self.storage.mark_failed(item.name, stage, error)
        return {
            'success': False,
            'name': item.name,
            'stage': stage,
            'error': str(error),
            'exception': error,
            'reports': reports,
            'files': files + [str(marker)],
            'timestamp': datetime.now().isoformat()
        }

    def aggregate(self, results: List[Dict[str, Any]], items: List[PipelineInput]) -> List[MetricsReport]:
        """
        每个阶段对成功的序列取平均，PSKL-J 按整个语料计算
        """
        aggregates = []
        succeeded = [(r, item) for r, item in zip(results, items) if r['success']]
        if not succeeded:
            return aggregates
        labels = [report.stage for report in succeeded[0][0]['reports']]
        for index, label in enumerate(labels):
            reports = [r['reports'][index] for r, _ in succeeded]
            pskl = None
            if all(item.reference is not None for _, item in succeeded):
                sequences = [r['sequences'][index] for r, _ in succeeded]
                pskl = self.evaluator.corpus_pskl(
                    sequences, [item.reference for _, item in succeeded], [item.skeleton for _, item in succeeded]
                )
            aggregates.append(self.evaluator.aggregate(reports, pskl=pskl, stage=label))
        return aggregates

    def run(self, items: List[PipelineInput], workers: Optional[int] = None, report_name: str = 'report.json'):
        """
        运行流水线

        Args:
            items: 输入列表
            workers: 并行线程数（默认取配置）
            report_name: 报告文件名

        Returns:
            汇总字典：success, results, reports, report_path
        """
        self.ensure_generator()
        workers = workers or self.config.pipeline.workers
        self.logger.info(f"Running pipeline on {len(items)} inputs with {workers} workers")
        with WorkerPool(workers) as pool:
            results = pool.map(self.run_one, items)

        reports = [report for result in results for report in result['reports']]
        reports.extend(self.aggregate(results, items))
        report_path = self.storage.path(report_name)
        save_reports(reports, report_path)
        failed = [r for r in results if not r['success']]
        if failed:
            self.logger.warning(f"{len(failed)} of {len(items)} inputs failed")
        return {
            'success': not failed,
            'results': results,
            'reports': reports,
            'report_path': str(report_path),
            'timestamp': datetime.now().isoformat()
        }


def default_inputs(config: PipelineConfig, count: int, seed: int, skeleton: Optional[Skeleton] = None):
    """合成场景作为流水线输入"""
    collector = SyntheticCollector(config.synth, T=config.generator.T, fps=config.generator.fps)
    return [PipelineInput.from_scene(scene) for scene in collector.collect(seed=seed, count=count,
                                                                         skeleton=skeleton or default_skeleton())]
