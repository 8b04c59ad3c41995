# PSKL-J
# 关节加速度功率谱的 KL 散度（双向）

import logging
from typing import List, Sequence, Tuple

import numpy as np

from common.errors import MetricUndefinedError

logger = logging.getLogger(__name__)

PSKL_FLOOR = 1e-8


def joint_accelerations(positions, fps: float) -> np.ndarray:
    """
    二阶中心差分求关节加速度

    Args:
        positions: (F, J, 3) 关节位置
        fps: 帧率

    Returns:
        (F-2, J, 3)
    """
    positions = np.asarray(positions, dtype=np.float64)
    if positions.shape[0] < 3:
        raise MetricUndefinedError(f"PSKL-J needs at least 3 frames, got {positions.shape[0]}")
    return (positions[2:] - 2.0 * positions[1:-1] + positions[:-2]) * fps ** 2


def power_spectrum(accelerations) -> np.ndarray:
    """
    沿时间轴的离散傅里叶变换模的平方 (bins, J, 3)
    """
    return np.abs(np.fft.rfft(accelerations, axis=0)) ** 2


def corpus_distribution(corpus: Sequence[np.ndarray], fps: float, length: int, floor: float = PSKL_FLOOR) -> np.ndarray:
    """
    语料平均功率谱，加下限后按频率归一化为分布

    Args:
        corpus: (F, J, 3) 序列列表
        fps: 帧率
        length: 统一裁剪后的帧数
        floor: 下限 ε

    Returns:
        (bins, J, 3) 每个关节-坐标轴上的频率分布
    """
    spectra = [power_spectrum(joint_accelerations(np.asarray(seq)[:length], fps)) for seq in corpus]
    mean = np.mean(spectra, axis=0) + floor
    return mean / mean.sum(axis=0, keepdims=True)


def kl_divergence(p, q) -> float:
    """
    每个关节-坐标轴上的 KL(p || q)，再取平均
    """
    return float(np.mean(np.sum(p * np.log(p / q), axis=0)))


def pskl_j(seq_a: List[np.ndarray], seq_b: List[np.ndarray], fps: float,
           floor: float = PSKL_FLOOR) -> Tuple[float, float]:
    """
    两个语料之间的 PSKL-J

    所有序列裁剪到最短长度以对齐频率分箱。

    Args:
        seq_a: 关节位置序列列表，每个 (F, J, 3)
        seq_b: 关节位置序列列表
        fps: 帧率
        floor: 功率谱下限

    Returns:
        (KL(a || b), KL(b || a))
    """
    if len(seq_a) == 0 or len(seq_b) == 0:
        raise MetricUndefinedError("PSKL-J needs non-empty corpora")
    length = min(np.asarray(seq).shape[0] for seq in list(seq_a) + list(seq_b))
    if length < 3:
        raise MetricUndefinedError(f"PSKL-J needs at least 3 frames, got {length}")
    p = corpus_distribution(seq_a, fps, length, floor)
    q = corpus_distribution(seq_b, fps, length, floor)
    return kl_divergence(p, q), kl_divergence(q, p)
