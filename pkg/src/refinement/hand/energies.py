# Hand Refinement Energies
# 手部优化能量 E1-E4（TensorFlow 自动微分，最近邻在每次评估中固定）

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import tensorflow as tf
from sklearn.neighbors import KDTree

from config.pipeline_config import HandRefineSettings
from kinematics.differentiable import tf_finger_keypoints, tf_global_transforms, tf_surface_points
from kinematics.forward_kinematics import global_transforms
from kinematics.hand_model import HandSurface, capsule_segments, capsule_signed_distance, surface_from_transforms
from kinematics.pose import POSE_DIM, rotation_slice
from kinematics.skeleton import CONTACT_FINGER_NAMES, Skeleton, optimized_hand_joint_indices
from .object_cloud import ObjectCloud

logger = logging.getLogger(__name__)

ENERGY_TERMS = ('E1', 'E2', 'E3', 'E4')
_SQ_EPS = 1e-24
# 物体点穿入手部时，在这么多个最近手部点中寻找法向相对的对应点
FACING_CANDIDATES = 16


def safe_norm(x, axis=-1):
    """
    零向量处梯度为 0 的 2-范数
    """
    sq = tf.reduce_sum(tf.square(x), axis=axis)
    positive = sq > _SQ_EPS
    return tf.where(positive, tf.sqrt(tf.where(positive, sq, tf.ones_like(sq))), tf.zeros_like(sq))


def penalty(x, delta):
    """d(x) = |min(x + delta, 0)|"""
    return tf.nn.relu(-(x + delta))


def finger_gap_penalty(keypoints, delta2):
    """
    每个手指关键点到其余四指关键点的平均最近距离低于 delta2 的部分

    Args:
        keypoints: (L, 5, K, 3) 张量
        delta2: 最小间距（米）

    Returns:
        (L, 5) 张量，未乘权重
    """
    keypoints = tf.convert_to_tensor(keypoints, dtype=tf.float64)
    num_frames = tf.shape(keypoints)[0]
    num_fingers = keypoints.shape[1]
    gaps = []
    for g in range(num_fingers):
        others = [k for k in range(num_fingers) if k != g]
        own = keypoints[:, g]
        rest = tf.reshape(tf.gather(keypoints, others, axis=1), [num_frames, -1, 3])
        pair = safe_norm(own[:, :, None, :] - rest[:, None, :, :])
        mean_nearest = tf.reduce_mean(tf.reduce_min(pair, axis=-1), axis=-1)
        gaps.append(tf.nn.relu(delta2 - mean_nearest))
    return tf.stack(gaps, axis=1)


def deviation_penalty(joints, original_joints, flip_sign: bool = False):
    """
    |min(v - v_ref, 0)|：关节帧间位移小于优化前位移的部分

    Args:
        joints: (L, J, 3) 优化后的关节位置
        original_joints: (L, J, 3) 优化前的关节位置
        flip_sign: 改用 |min(v_ref - v, 0)|

    Returns:
        (L-1, J) 张量，未乘权重
    """
    joints = tf.convert_to_tensor(joints, dtype=tf.float64)
    original_joints = tf.convert_to_tensor(original_joints, dtype=tf.float64)
    speed = safe_norm(joints[1:] - joints[:-1])
    speed_ref = safe_norm(original_joints[1:] - original_joints[:-1])
    gap = speed_ref - speed if flip_sign else speed - speed_ref
    return tf.nn.relu(-gap)


def contact_finger_distances(hand_points: np.ndarray, hand: HandSurface, cloud: ObjectCloud,
                             tree=None) -> np.ndarray:
    """
    四个接触手指表面点到物体的平均最近距离

    Args:
        hand_points: (778, 3) 单帧手部表面点
        hand: 手部表面模型
        cloud: 物体点云
        tree: 可选的物体 KDTree

    Returns:
        (4,)，顺序与 CONTACT_FINGER_NAMES 一致
    """
    tree = tree if tree is not None else cloud.tree()
    dist, _ = tree.query(np.asarray(hand_points, dtype=np.float64), k=1)
    return np.array([dist[hand.finger_points[f], 0].mean() for f in CONTACT_FINGER_NAMES])


@dataclass(frozen=True)
class Neighbors:
    """
    一次能量评估中固定的最近邻索引
    """
    hand_to_object: np.ndarray   # (L, 778)
    object_to_hand: np.ndarray   # (L, 4096)，法向相对的手部点
    object_inside: np.ndarray    # (L, 4096)，物体点是否落在手部胶囊体内


class HandEnergy:
    """
    最后 L 帧上 12 个手指关节 6D 旋转的能量函数

    变量 x 的形状为 (L, 12, 6)。
    """

    def __init__(self, skeleton: Skeleton, hand: HandSurface, cloud: ObjectCloud, config: HandRefineSettings,
                 window_params: np.ndarray, original_params: np.ndarray = None):
        """
        初始化能量函数

        Args:
            skeleton: 骨架
            hand: 手部表面模型
            cloud: 物体点云
            config: 手部优化配置
            window_params: (L, 225) 当前窗口内的姿态，非优化参数保持不变
            original_params: (L, 225) 优化前的姿态（E4 的参照），默认等于 window_params
        """
        self.logger = logging.getLogger(__name__)
        self.skeleton = skeleton
        self.hand = hand
        self.cloud = cloud
        self.config = config
        self.joints = optimized_hand_joint_indices(skeleton)
        self.columns = np.concatenate([np.arange(POSE_DIM)[rotation_slice(j)] for j in self.joints])

        window_params = np.asarray(window_params, dtype=np.float64)
        original_params = window_params if original_params is None else np.asarray(original_params, dtype=np.float64)
        self.window_params = window_params
        self.num_frames = window_params.shape[0]

        selection = np.zeros((len(self.columns), POSE_DIM))
        selection[np.arange(len(self.columns)), self.columns] = 1.0
        masked = window_params.copy()
        masked[:, self.columns] = 0.0
        self._selection = tf.constant(selection, dtype=tf.float64)
        self._masked = tf.constant(masked, dtype=tf.float64)

        self._offsets = tf.constant(skeleton.offsets, dtype=tf.float64)
        self._object_points = tf.constant(cloud.points, dtype=tf.float64)
        self._object_normals = tf.constant(cloud.normals, dtype=tf.float64)
        self._object_tree = cloud.tree()

        self._finger_points = [np.asarray(hand.finger_points[f]) for f in CONTACT_FINGER_NAMES]

        positions = global_transforms(skeleton, original_params)[1]
        self._original_joints = tf.constant(positions[:, self.joints], dtype=tf.float64)

    def initial_variables(self) -> np.ndarray:
        return self.window_params[:, self.columns].reshape(self.num_frames, len(self.joints), 6)

    def assemble(self, x) -> np.ndarray:
        """把变量写回窗口姿态 (L, 225)"""
        params = self.window_params.copy()
        params[:, self.columns] = np.asarray(x).reshape(self.num_frames, -1)
        return params

    def _params(self, x):
        flat = tf.reshape(x, [self.num_frames, len(self.columns)])
        return self._masked + tf.matmul(flat, self._selection)

    def neighbors(self, x) -> Neighbors:
        """
        在当前姿态下计算双向最近邻

        手部点取最近的物体点。物体点是否在手内由胶囊体并集精确判定，
        其对应点取法向与物体法向相对的最近手部点（即物体点离开手部要穿过的那一侧），
        候选中没有相对法向时退回最近点。
        """
        rotations, positions = global_transforms(self.skeleton, self.assemble(x))
        points, normals = surface_from_transforms(self.hand, rotations, positions)
        starts, ends, radii = capsule_segments(self.hand, rotations, positions)
        _, hand_to_object = self._object_tree.query(points.reshape(-1, 3), k=1)
        hand_to_object = hand_to_object[:, 0].reshape(self.num_frames, -1)

        k = min(FACING_CANDIDATES, points.shape[1])
        rows = np.arange(self.cloud.points.shape[0])
        object_to_hand, object_inside = [], []
        for i in range(self.num_frames):
            _, candidates = KDTree(points[i]).query(self.cloud.points, k=k)
            facing = np.einsum('nkj,nj->nk', normals[i][candidates], self.cloud.normals) < 0.0
            first = np.where(facing.any(axis=1), facing.argmax(axis=1), 0)
            object_to_hand.append(candidates[rows, first])
            object_inside.append(capsule_signed_distance(self.cloud.points, starts[i], ends[i], radii) < 0.0)
        return Neighbors(hand_to_object=hand_to_object, object_to_hand=np.stack(object_to_hand),
                         object_inside=np.stack(object_inside))

    def contact_distances(self, x) -> np.ndarray:
        """最后一帧四个接触手指到物体的平均最近距离 (4,)"""
        rotations, positions = global_transforms(self.skeleton, self.assemble(x)[-1])
        points, _ = surface_from_transforms(self.hand, rotations, positions)
        return contact_finger_distances(points, self.hand, self.cloud, self._object_tree)

    def terms(self, x, nn: Neighbors) -> Dict[str, tf.Tensor]:
        """
        E1-E4（已乘权重）

        Args:
            x: (L, 12, 6) 张量
            nn: 固定的最近邻

        Returns:
            各项能量张量
        """
        cfg = self.config
        params = self._params(x)
        rotations, positions = tf_global_transforms(params, self._offsets, self.skeleton.parents)
        points, _ = tf_surface_points(
            self.hand.local_points, self.hand.local_normals, self.hand.owners, rotations, positions
        )

        # E1：双向有符号倒角距离的穿透惩罚
        nearest_obj = tf.gather(self._object_points, nn.hand_to_object)
        nearest_obj_normals = tf.gather(self._object_normals, nn.hand_to_object)
        diff = points - nearest_obj
        hand_dist = safe_norm(diff)
        hand_signed = tf.sign(tf.reduce_sum(diff * nearest_obj_normals, axis=-1)) * hand_dist
        hand_signed = tf.where(hand_signed == 0, hand_dist, hand_signed)

        # 物体点的符号由胶囊体包含关系决定，距离取到法向相对手部点的距离
        nearest_hand = tf.gather(points, nn.object_to_hand, batch_dims=1)
        obj_dist = safe_norm(self._object_points[None] - nearest_hand)
        obj_signed = tf.where(nn.object_inside, -obj_dist, obj_dist)

        e1 = cfg.alpha1 * tf.reduce_sum(penalty(obj_signed, cfg.delta)) + \
            cfg.alpha2 * tf.reduce_sum(penalty(hand_signed, cfg.delta))

        # E2：最后一帧四个手指接触物体
        last = hand_dist[-1]
        e2 = cfg.alpha3 * tf.add_n([tf.reduce_mean(tf.gather(last, idx)) for idx in self._finger_points])

        # E3：不同手指关键点之间的最小距离
        keypoints = tf_finger_keypoints(self.skeleton, rotations, positions)
        e3 = cfg.alpha4 * tf.reduce_sum(finger_gap_penalty(keypoints, cfg.delta2))

        # E4：手指关节帧间位移与优化前的偏差
        joints = tf.gather(positions, self.joints, axis=1)
        if self.num_frames >= 2:
            e4 = cfg.alpha5 * tf.reduce_sum(deviation_penalty(joints, self._original_joints, cfg.e4_flip_sign))
        else:
            e4 = tf.constant(0.0, dtype=tf.float64)

        return {'E1': e1, 'E2': e2, 'E3': e3, 'E4': e4}

    def evaluate(self, x, nn: Neighbors = None, with_gradient: bool = True) -> Tuple[float, np.ndarray, Dict[str, float]]:
        """
        计算总能量及其对 x 的梯度

        Args:
            x: (L, 12, 6) 数组
            nn: 最近邻；为空时在 x 处重新计算
            with_gradient: 是否计算梯度

        Returns:
            (总能量, 梯度 (L, 12, 6) 或 None, 各项能量)
        """
        x = np.asarray(x, dtype=np.float64)
        nn = nn if nn is not None else self.neighbors(x)
        variable = tf.constant(x)
        with tf.GradientTape() as tape:
            tape.watch(variable)
            terms = self.terms(variable, nn)
            total = tf.add_n(list(terms.values()))
        gradient = tape.gradient(total, variable).numpy() if with_gradient else None
        values = {name: float(value.numpy()) for name, value in terms.items()}
        return float(total.numpy()), gradient, values
