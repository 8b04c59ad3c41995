# Hand Refiner
# 上肢抓取后处理：手腕锥约束 -> 手臂 IK -> 手指关节梯度下降 -> 均值滤波

import logging
from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np

from common.errors import EnergyDivergenceError
from config.pipeline_config import HandRefineSettings
from kinematics.forward_kinematics import forward_kinematics
from kinematics.hand_model import HandSurface, build_hand_surface
from kinematics.pose import POSE_DIM, rotation_slice
from kinematics.rotation import orthonormalize_rot6d
from kinematics.skeleton import Skeleton
from motion.filters import mean_filter3
from motion.sequence import MotionSequence
from .arm_ik import arm_ik_follow, right_arm_chain
from .energies import HandEnergy
from .object_cloud import ObjectCloud
from .wrist_cone import wrist_cone_correct

logger = logging.getLogger(__name__)


def _columns(joints) -> np.ndarray:
    return np.concatenate([np.arange(POSE_DIM)[rotation_slice(j)] for j in joints])


class HandRefiner:
    """
    手部后处理器
    """

    def __init__(self, config=None):
        """
        初始化手部后处理器

        Args:
            config: HandRefineSettings 或字典
        """
        self.logger = logging.getLogger(__name__)
        if isinstance(config, HandRefineSettings):
            self.config = config
        else:
            self.config = HandRefineSettings(**(config or {}))
        self.trace: List[Dict[str, float]] = []

    def optimize(self, energy: HandEnergy) -> np.ndarray:
        """
        固定步长梯度下降，能量上升时步长减半

        返回最后一个满足接触约束的迭代点：每个接触手指在末帧的平均距离
        不超过优化前的值，或已小于 contact_floor。

        Args:
            energy: 能量函数

        Returns:
            优化后的变量 (L, 12, 6)
        """
        cfg = self.config
        x = energy.initial_variables()
        step = cfg.step_size
        current, gradient, terms = energy.evaluate(x)
        self._check_finite(current, terms, 0)
        self.trace = [dict(terms, total=current, step=step, iteration=0)]
        reference = energy.contact_distances(x)
        best, best_iteration = x, 0

        for iteration in range(1, cfg.iterations + 1):
            if not np.any(gradient):
                self.logger.debug(f"Zero gradient at iteration {iteration}, stopping")
                break
            accepted = False
            for _ in range(cfg.max_backtracks + 1):
                candidate = x - step * gradient
                value, _, candidate_terms = energy.evaluate(candidate, with_gradient=False)
                self._check_finite(value, candidate_terms, iteration)
                if value <= current:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                self.logger.debug(f"No descent after {cfg.max_backtracks} halvings at iteration {iteration}")
                break
            x = candidate
            current, gradient, terms = energy.evaluate(x)
            self._check_finite(current, terms, iteration)
            self.trace.append(dict(terms, total=current, step=step, iteration=iteration))
            self.logger.debug(f"Iteration {iteration}: energy {current:.6f} step {step:.2e}")
            distances = energy.contact_distances(x)
            if np.all((distances <= reference) | (distances < cfg.contact_floor)):
                best, best_iteration = x, iteration

        if best_iteration != self.trace[-1]['iteration']:
            self.logger.info(
                f"Contact distance grew after iteration {best_iteration}, "
                f"keeping that iterate instead of iteration {self.trace[-1]['iteration']}"
            )
        return best

    def _check_finite(self, value: float, terms: Dict[str, float], iteration: int):
        if not np.isfinite(value):
            self.logger.error(f"Non-finite hand energy at iteration {iteration}: {terms}")
            raise EnergyDivergenceError(f"hand energy became non-finite at iteration {iteration}", terms)

    def refine(self, sequence: MotionSequence, skeleton: Skeleton, cloud: ObjectCloud,
               hand: Optional[HandSurface] = None) -> MotionSequence:
        """
        手部后处理主流程

        Args:
            sequence: 动作序列
            skeleton: 骨架
            cloud: 与动作处于同一世界坐标系的物体点云
            hand: 手部表面模型（默认由骨架构建）

        Returns:
            修正后的动作序列
        """
        cfg = self.config
        hand = hand or build_hand_surface(skeleton)
        params = np.array(sequence.params)
        num_frames = params.shape[0]
        arm = right_arm_chain(skeleton)

        wrists = forward_kinematics(skeleton, params)[:, arm.end]
        corrected, cone_mask = wrist_cone_correct(wrists, wrists[-1], cfg.wrist_radius, cfg.cone_half_angle)
        if np.any(cone_mask):
            self.logger.info(f"Wrist cone corrected {int(cone_mask.sum())} frames")
            params = arm_ik_follow(skeleton, params, corrected, cone_mask)

        window = min(cfg.window, num_frames)
        start = num_frames - window
        energy = HandEnergy(skeleton, hand, cloud, cfg, params[start:])
        initial_total = None
        if cfg.iterations > 0:
            x = self.optimize(energy)
            initial_total = self.trace[0]['total']
            params[start:] = energy.assemble(x)
            self.logger.info(
                f"Hand energy {initial_total:.6f} -> {self.trace[-1]['total']:.6f} "
                f"in {len(self.trace) - 1} iterations"
            )

        arm_columns = _columns([arm.base, arm.mid, arm.end])
        hand_columns = energy.columns
        arm_rows = cone_mask.copy()
        arm_rows[start:] = True
        hand_rows = np.zeros(num_frames, dtype=bool)
        hand_rows[start:] = True

        if cfg.apply_mean_filter:
            smoothed = mean_filter3(params)
            params[np.ix_(arm_rows, arm_columns)] = smoothed[np.ix_(arm_rows, arm_columns)]
            params[np.ix_(hand_rows, hand_columns)] = smoothed[np.ix_(hand_rows, hand_columns)]

        out = np.array(sequence.params)
        for rows, columns in ((arm_rows, arm_columns), (hand_rows, hand_columns)):
            for i in np.flatnonzero(rows):
                block = params[i, columns]
                if np.array_equal(block, out[i, columns]):
                    continue
                out[i, columns] = orthonormalize_rot6d(block.reshape(-1, 6)).reshape(-1)
        return sequence.with_params(out)

    def refine_safe(self, sequence: MotionSequence, skeleton: Skeleton, cloud: ObjectCloud) -> Dict[str, Any]:
        """
        带错误捕获的手部后处理

        Returns:
            结果字典
        """
        try:
            refined = self.refine(sequence, skeleton, cloud)
            return {
                "success": True,
                "sequence": refined,
                "trace": self.trace,
                "timestamp": datetime.now().isoformat()
            }
        except Exception as e:
            self.logger.error(f"Error refining hand: {str(e)}")
            return {
                "success": False,
                "error": str(e),
                "trace": self.trace,
                "timestamp": datetime.now().isoformat()
            }


def refine_hand(sequence: MotionSequence, cloud: ObjectCloud, skeleton: Skeleton, config=None) -> MotionSequence:
    """
    手部后处理的函数入口
    """
    return HandRefiner(config).refine(sequence, skeleton, cloud)
