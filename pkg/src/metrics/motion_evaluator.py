# Motion Evaluator
# 汇总四项指标：END-MJD、PSKL-J、INTER-VOLUME、SKATING

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config.pipeline_config import MetricsSettings
from kinematics.forward_kinematics import forward_kinematics, global_transforms
from kinematics.hand_model import HandSurface, build_hand_surface, capsule_segments
from kinematics.skeleton import Skeleton
from motion.sequence import MotionSequence
from refinement.hand.object_cloud import ObjectCloud
from .end_mjd import end_mjd
from .pskl import pskl_j
from .skating import skating
from .voxel import inter_volume, voxelize


class MetricsReport(BaseModel):
    """
    单条序列（或语料汇总）的评估结果
    """
    model_config = ConfigDict(extra='forbid')

    name: str = 'sequence'
    stage: str = 'final'
    end_mjd_body: float = Field(ge=0, description="mm")
    end_mjd_rhand: float = Field(ge=0, description="mm")
    pskl_pred_gt: Optional[float] = Field(None, ge=0)
    pskl_gt_pred: Optional[float] = Field(None, ge=0)
    inter_v1: Optional[float] = Field(None, ge=0, description="cm^3")
    inter_v5: Optional[float] = Field(None, ge=0, description="cm^3")
    inter_v10: Optional[float] = Field(None, ge=0, description="cm^3")
    skating: float = Field(ge=0, description="cm/s")
    wall_time: float = Field(0.0, ge=0, description="seconds")

    @model_validator(mode='after')
    def _check_windows(self):
        volumes = [self.inter_v1, self.inter_v5, self.inter_v10]
        if all(v is not None for v in volumes) and not (volumes[0] <= volumes[1] <= volumes[2]):
            raise ValueError(f"inter-volume must satisfy V1 <= V5 <= V10, got {volumes}")
        return self


class MotionEvaluator:
    """
    动作评估器
    """

    def __init__(self, config=None):
        """
        初始化动作评估器

        Args:
            config: MetricsSettings 或字典
        """
        self.logger = logging.getLogger(__name__)
        if isinstance(config, MetricsSettings):
            self.config = config
        else:
            self.config = MetricsSettings(**(config or {}))

    def object_grid(self, cloud: ObjectCloud):
        return voxelize(cloud.points, cloud.normals, step=self.config.voxel_step)

    def inter_volumes(self, sequence: MotionSequence, skeleton: Skeleton, cloud: ObjectCloud,
                      hand: Optional[HandSurface] = None, object_grid=None) -> Dict[int, float]:
        """
        各帧窗口的最大相交体积

        Returns:
            窗口 -> cm³
        """
        hand = hand or build_hand_surface(skeleton)
        object_grid = object_grid if object_grid is not None else self.object_grid(cloud)
        windows = self.config.inter_windows
        frames = sequence.params[-max(windows):]
        rotations, positions = global_transforms(skeleton, frames)
        starts, ends, radii = capsule_segments(hand, rotations, positions)
        capsules = [(starts[i], ends[i], radii) for i in range(len(frames))]
        return {n: inter_volume(capsules, object_grid, n) for n in windows}

    def evaluate(self, sequence: MotionSequence, skeleton: Skeleton, target=None,
                 reference: Optional[MotionSequence] = None, cloud: Optional[ObjectCloud] = None,
                 hand: Optional[HandSurface] = None, wall_time: float = 0.0,
                 name: str = 'sequence', stage: str = 'final') -> MetricsReport:
        """
        评估一条序列

        Args:
            sequence: 生成的动作序列
            skeleton: 骨架
            target: 目标姿态（默认取参考序列末帧，再否则取生成序列末帧）
            reference: 真实动作（用于 PSKL-J）
            cloud: 物体点云（用于 INTER-VOLUME）
            hand: 手部表面模型
            wall_time: 生成耗时（秒）
            name: 序列名
            stage: 处理阶段

        Returns:
            MetricsReport
        """
        if target is None:
            target = reference.params[-1] if reference is not None else sequence.params[-1]
        body, rhand = end_mjd(sequence.params[-1], target, skeleton)

        pskl = (None, None)
        if reference is not None:
            pskl = pskl_j(
                [forward_kinematics(skeleton, sequence.params)],
                [forward_kinematics(skeleton, reference.params)],
                sequence.fps,
                self.config.pskl_floor
            )

        volumes = {}
        if cloud is not None:
            volumes = self.inter_volumes(sequence, skeleton, cloud, hand)

        report = MetricsReport(
            name=name,
            stage=stage,
            end_mjd_body=body,
            end_mjd_rhand=rhand,
            pskl_pred_gt=pskl[0],
            pskl_gt_pred=pskl[1],
            inter_v1=volumes.get(1),
            inter_v5=volumes.get(5),
            inter_v10=volumes.get(10),
            skating=skating(sequence, skeleton, mode=self.config.skating_mode),
            wall_time=wall_time
        )
        self.logger.debug(f"Evaluated {name} [{stage}]: {report.model_dump()}")
        return report

    def aggregate(self, reports: Sequence[MetricsReport], pskl: Optional[tuple] = None,
                  stage: str = 'final') -> MetricsReport:
        """
        对多条序列的结果取平均；PSKL-J 可由整个语料计算后传入

        Args:
            reports: 每条序列的结果
            pskl: 语料级 PSKL-J
            stage: 处理阶段

        Returns:
            名为 aggregate 的 MetricsReport
        """
        frame = pd.DataFrame([r.model_dump() for r in reports])
        numeric = frame.drop(columns=['name', 'stage'])

        def mean_or_none(column):
            values = numeric[column].dropna()
            return float(values.mean()) if len(values) == len(numeric) and len(values) else None

        fields = {column: mean_or_none(column) for column in numeric.columns}
        if pskl is not None:
            fields['pskl_pred_gt'], fields['pskl_gt_pred'] = pskl
        fields['wall_time'] = float(numeric['wall_time'].sum())
        return MetricsReport(name='aggregate', stage=stage, **fields)

    def corpus_pskl(self, generated: Sequence[MotionSequence], references: Sequence[MotionSequence],
                    skeleton) -> tuple:
        """
        生成语料与真实语料之间的 PSKL-J

        Args:
            generated: 生成序列
            references: 真实序列
            skeleton: 共用的骨架，或与序列一一对应的骨架列表
        """
        skeletons = list(skeleton) if isinstance(skeleton, (list, tuple)) else [skeleton] * len(generated)
        fps = generated[0].fps
        return pskl_j(
            [forward_kinematics(k, s.params) for k, s in zip(skeletons, generated)],
            [forward_kinematics(k, s.params) for k, s in zip(skeletons, references)],
            fps,
            self.config.pskl_floor
        )


def save_reports(reports: Sequence[MetricsReport], path) -> Dict[str, Any]:
    """
    写出评估报告（JSON 记录列表，同时写出同名 CSV）

    Returns:
        写出的文件信息
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = [r.model_dump() for r in reports]
    path.write_text(json.dumps(records, indent=2), encoding='utf-8')
    csv_path = path.with_suffix('.csv')
    pd.DataFrame(records).to_csv(csv_path, index=False)
    return {
        "report": str(path),
        "table": str(csv_path),
        "records": len(records),
        "timestamp": datetime.now().isoformat()
    }


def load_reports(path) -> List[MetricsReport]:
    data = json.loads(Path(path).read_text(encoding='utf-8'))
    return [MetricsReport(**record) for record in data]
