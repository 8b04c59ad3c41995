# Synthetic Collector
# 合成训练数据：伸手抓取动作（支撑脚由 IK 固定）与解析法向的物体点云

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.pipeline_config import SynthSettings
from data.processors.training_processor import TrainingProcessor, TrainingSample
from data.storage.motion_storage import SceneSpec, save_cloud, save_motion, save_scene
from kinematics.forward_kinematics import global_transforms
from kinematics.pose import PHI_SLICE, T_SLICE, identity_vector, rotation_slice
from kinematics.rotation import axis_angle_matrix, matrix_to_rot6d
from kinematics.skeleton import FINGER_NAMES, Skeleton, default_skeleton, finger_joint_indices
from motion.sequence import MotionSequence
from refinement.foot.contact_groups import leg_chains
from refinement.foot.foot_refiner import retarget_foot
from refinement.hand.arm_ik import arm_ik_follow, right_arm_chain
from refinement.hand.object_cloud import NUM_OBJECT_POINTS, ObjectCloud

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))
PLASTIC_NUMBER = 1.32471795724474602596

UP = np.array([0.0, 1.0, 0.0])
STEP_HEIGHT = 0.05
SWING_WINDOWS = ((0.15, 0.5), (0.5, 0.85))
HAND_OPEN_END = 0.6
OPEN_ANGLE = 0.2
THUMB_CURL = 0.6


def ease(s):
    """余弦缓动，s ∈ [0, 1]"""
    return 0.5 - 0.5 * np.cos(np.pi * np.clip(s, 0.0, 1.0))


def fibonacci_sphere(count: int) -> np.ndarray:
    """
    Fibonacci 格点：单位球面上近似均匀的 count 个方向
    """
    i = np.arange(count) + 0.5
    y = 1.0 - 2.0 * i / count
    r = np.sqrt(np.maximum(1.0 - y * y, 0.0))
    theta = GOLDEN_ANGLE * i
    dirs = np.stack([r * np.cos(theta), y, r * np.sin(theta)], axis=1)
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def sphere_cloud(center, radius: float, count: int = NUM_OBJECT_POINTS) -> ObjectCloud:
    """球面点云，法向为径向"""
    dirs = fibonacci_sphere(count)
    return ObjectCloud(np.asarray(center, dtype=np.float64) + radius * dirs, dirs)


def _largest_remainder(weights: np.ndarray, total: int) -> np.ndarray:
    raw = total * weights / weights.sum()
    counts = np.floor(raw).astype(int)
    order = np.argsort(-(raw - counts), kind='stable')
    counts[order[:total - counts.sum()]] += 1
    return counts


def box_cloud(center, half_extents, count: int = NUM_OBJECT_POINTS) -> ObjectCloud:
    """
    长方体表面点云：按面积分配点数，面内用 R2 低差异序列采样，法向为面法向

    Args:
        center: 中心 (3,)
        half_extents: 半边长 (3,)
        count: 点数
    """
    center = np.asarray(center, dtype=np.float64)
    h = np.asarray(half_extents, dtype=np.float64)
    faces = [(axis, sign) for axis in range(3) for sign in (1.0, -1.0)]
    areas = np.array([4.0 * np.prod(np.delete(h, axis)) for axis, _ in faces])
    a1, a2 = 1.0 / PLASTIC_NUMBER, 1.0 / PLASTIC_NUMBER ** 2
    points, normals = [], []
    for (axis, sign), n in zip(faces, _largest_remainder(areas, count)):
        if n == 0:
            continue
        k = np.arange(n)
        u = (0.5 + a1 * k) % 1.0
        v = (0.5 + a2 * k) % 1.0
        others = [a for a in range(3) if a != axis]
        face = np.zeros((n, 3))
        face[:, axis] = sign * h[axis]
        face[:, others[0]] = (2.0 * u - 1.0) * h[others[0]]
        face[:, others[1]] = (2.0 * v - 1.0) * h[others[1]]
        normal = np.zeros((n, 3))
        normal[:, axis] = sign
        points.append(face)
        normals.append(normal)
    return ObjectCloud(center + np.concatenate(points), np.concatenate(normals))


def object_cloud(shape: str, size: Sequence[float], center) -> ObjectCloud:
    if shape == 'sphere':
        return sphere_cloud(center, size[0])
    return box_cloud(center, size)


def _object_half_height(shape: str, size: Sequence[float]) -> float:
    return float(size[0] if shape == 'sphere' else size[1])


def _foot_track(i: int, T: int, start, end, window: Tuple[float, float], height: float) -> np.ndarray:
    lo, hi = int(round(window[0] * T)), int(round(window[1] * T))
    if hi <= lo:
        return start if i < lo else end
    if i <= lo:
        return start
    if i >= hi:
        return end
    u = (i - lo) / (hi - lo)
    return start + ease(u) * (end - start) + height * np.sin(np.pi * u) * UP


def _finger_curl(s: float, close: float) -> float:
    if s < HAND_OPEN_END:
        return -OPEN_ANGLE * np.sin(np.pi * s / HAND_OPEN_END)
    return close * ease((s - HAND_OPEN_END) / (1.0 - HAND_OPEN_END))


def synthesize_reach(skeleton: Skeleton, rng: np.random.Generator, T: int, shape: str, size: Sequence[float],
                     center=None) -> Tuple[np.ndarray, np.ndarray]:
    """
    生成一段伸手抓取动作

    根节点缓动前进，双脚先后抬起落下（支撑脚用 IK 固定在地面），
    右手腕沿缓动路径到达物体上方，手指先张开后握合。

    Args:
        skeleton: 骨架
        rng: 随机数生成器
        T: 序列长度（帧数 T+1）
        shape: 'sphere' 或 'box'
        size: 球半径 (r,) 或盒半边长 (hx, hy, hz)
        center: 物体中心；为空时按伸手方向放置

    Returns:
        (姿态序列 (T+1, 225), 物体中心 (3,))
    """
    legs = leg_chains(skeleton)
    arm = right_arm_chain(skeleton)
    leg_length = legs[0].thigh_length + legs[0].shank_length
    arm_length = float(skeleton.bone_lengths[arm.mid - 1] + skeleton.bone_lengths[arm.end - 1])
    hand_scale = float(skeleton.bone_lengths[skeleton.joint_index('right_middle1') - 1]) / 0.098

    yaw = rng.uniform(-0.4, 0.4)
    heading = axis_angle_matrix(UP, yaw)
    forward = heading @ np.array([0.0, 0.0, 1.0])
    distance = rng.uniform(0.15, 0.35) * leg_length
    first = int(rng.integers(2))
    reach = rng.uniform(0.75, 0.95) * arm_length
    reach_dir = np.array([-rng.uniform(0.2, 0.5), -rng.uniform(0.3, 0.6), 1.0])
    reach_dir = heading @ (reach_dir / np.linalg.norm(reach_dir))
    close = rng.uniform(0.5, 0.9)

    rest = skeleton.rest_positions()
    feet = [leg.foot for leg in legs]
    crouch = 0.08 * leg_length
    t0 = np.array([0.0, -rest[feet, 1].min() - crouch, 0.0])

    frames = T + 1
    s = np.arange(frames) / T
    params = np.tile(identity_vector(), (frames, 1))
    params[:, T_SLICE] = t0 + ease(s)[:, None] * distance * forward
    params[:, PHI_SLICE] = matrix_to_rot6d(heading, check=False)
    for i in range(frames):
        curl = _finger_curl(s[i], close)
        for finger in FINGER_NAMES:
            angle = curl * (THUMB_CURL if finger == 'thumb' else 1.0)
            local = matrix_to_rot6d(axis_angle_matrix([0.0, 0.0, 1.0], angle), check=False)
            for joint in finger_joint_indices(skeleton, finger):
                params[i, rotation_slice(joint)] = local

    # 双脚：初始落点在地面 (y = 0)，前进 distance 后落下
    plants = []
    for foot in feet:
        start = t0 + heading @ rest[foot]
        start[1] = 0.0
        plants.append((start, start + distance * forward))
    order = (first, 1 - first)
    for i in range(frames):
        for slot, side in enumerate(order):
            start, end = plants[side]
            target = _foot_track(i, T, start, end, SWING_WINDOWS[slot], STEP_HEIGHT * leg_length / 0.85)
            params[i], _ = retarget_foot(skeleton, params[i], legs[side], target)

    _, positions = global_transforms(skeleton, params)
    palm_offset = heading @ np.array([-0.06 * hand_scale, 0.0, 0.0])
    clearance = _object_half_height(shape, size) + skeleton.hand.palm_radius + 0.005
    if center is None:
        wrist_goal = positions[-1, arm.base] + reach * reach_dir
        center = wrist_goal + palm_offset - clearance * UP
    else:
        center = np.asarray(center, dtype=np.float64)
        wrist_goal = center - palm_offset + clearance * UP
    wrist_body = positions[:, arm.end]
    targets = wrist_body + ease(s)[:, None] * (wrist_goal - wrist_body[-1])
    params = arm_ik_follow(skeleton, params, targets, keep_hand_orientation=True)
    return params, np.asarray(center, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    """
    合成场景：场景描述、骨架、带触地标签的真值动作与物体点云
    """
    name: str
    spec: SceneSpec
    skeleton: Skeleton
    sequence: MotionSequence
    cloud: ObjectCloud

    @property
    def start(self) -> np.ndarray:
        return self.sequence.params[0]

    @property
    def target(self) -> np.ndarray:
        return self.sequence.params[-1]

    def training_sample(self) -> TrainingSample:
        return TrainingSample(self.sequence, self.skeleton)


class SyntheticCollector:
    """
    合成数据采集器
    完全由随机种子决定，替代真实动作捕捉数据
    """

    def __init__(self, config: SynthSettings = None, T: int = 30, fps: float = 30.0):
        """
        初始化合成数据采集器

        Args:
            config: 合成数据配置
            T: 序列长度
            fps: 帧率
        """
        self.config = config or SynthSettings()
        self.logger = logging.getLogger(__name__)
        self.T = int(T)
        self.fps = float(fps)
        self.processor = TrainingProcessor({'contact_speed': self.config.contact_speed})

    def scene_spec(self, seed: int, index: int) -> SceneSpec:
        """
        第 index 个场景的描述（形状、尺寸、骨架缩放、场景种子）
        """
        rng = np.random.default_rng([int(seed), int(index)])
        shape = self.config.object_shape
        if shape == 'mixed':
            shape = ('sphere', 'box')[int(rng.integers(2))]
        if shape == 'sphere':
            size = (float(rng.uniform(0.03, 0.05)),)
        else:
            size = tuple(float(v) for v in rng.uniform(0.025, 0.045, 3))
        scale = float(rng.uniform(self.config.scale_min, self.config.scale_max))
        return SceneSpec(seed=int(rng.integers(2 ** 31)), shape=shape, size=size, scale=scale)

    def realize(self, spec: SceneSpec, skeleton: Optional[Skeleton] = None, name: str = 'scene') -> SyntheticScene:
        """
        由场景描述生成动作与点云

        Args:
            spec: 场景描述
            skeleton: 基础骨架（按 spec.scale 缩放），默认骨架为空时使用
            name: 场景名
        """
        base = skeleton or default_skeleton()
        scaled = base if spec.scale == 1.0 else base.scaled(spec.scale)
        rng = np.random.default_rng(spec.seed)
        params, center = synthesize_reach(scaled, rng, self.T, spec.shape, spec.size, spec.center)
        sequence = self.processor.label(MotionSequence(params, self.fps), scaled)
        cloud = object_cloud(spec.shape, spec.size, center)
        return SyntheticScene(name=name, spec=spec, skeleton=scaled, sequence=sequence, cloud=cloud)

    def collect(self, seed: int = 0, count: Optional[int] = None, skeleton: Optional[Skeleton] = None):
        """
        生成合成语料

        Args:
            seed: 随机种子
            count: 场景数（默认取配置）
            skeleton: 基础骨架

        Returns:
            SyntheticScene 列表
        """
        count = int(count or self.config.count)
        scenes = [self.realize(self.scene_spec(seed, k), skeleton, name=f"scene_{k:03d}") for k in range(count)]
        contact_ratio = np.mean([scene.sequence.contact_probs.mean() for scene in scenes])
        self.logger.info(f"Synthesized {count} scenes (seed {seed}, mean contact ratio {contact_ratio:.2f})")
        return scenes

    def validate(self, data) -> bool:
        """
        验证采集结果：非空且全部为 SyntheticScene
        """
        if not data:
            return False
        return all(isinstance(scene, SyntheticScene) for scene in data)

    def write(self, scenes: List[SyntheticScene], directory) -> List[str]:
        """
        写出场景文件、真值动作文件与点云文件

        Returns:
            场景文件路径列表
        """
        directory = Path(directory)
        paths = []
        for scene in scenes:
            motion_name = f"{scene.name}.motion.json"
            cloud_name = f"{scene.name}.cloud.txt"
            save_motion(directory / motion_name, scene.sequence, scene.skeleton)
            save_cloud(directory / cloud_name, scene.cloud)
            spec = SceneSpec(seed=scene.spec.seed, shape=scene.spec.shape, size=scene.spec.size,
                             scale=scene.spec.scale, center=scene.spec.center,
                             start_motion=motion_name, cloud=cloud_name)
            scene_path = directory / f"{scene.name}.scene.json"
            save_scene(scene_path, spec)
            paths.append(str(scene_path))
        return paths


def synth_corpus(seed: int, count: int, skeleton: Optional[Skeleton] = None, config: SynthSettings = None,
                 T: int = 30, fps: float = 30.0) -> List[SyntheticScene]:
    """
    合成语料的函数入口
    """
    return SyntheticCollector(config, T=T, fps=fps).collect(seed=seed, count=count, skeleton=skeleton)


def training_samples(scenes: List[SyntheticScene]) -> List[TrainingSample]:
    return [scene.training_sample() for scene in scenes]
