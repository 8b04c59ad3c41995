# Motion Filters
# 平滑滤波

import numpy as np


def mean_filter3(signal) -> np.ndarray:
    """
    大小为 3 的均值滤波，首尾样本保持不变

    内部样本 y_i = (x_{i-1} + x_i + x_{i+1}) / 3。

    Args:
        signal: 形状 (N, ...) 的序列，N >= 1

    Returns:
        与输入形状相同的新数组
    """
    x = np.asarray(signal, dtype=np.float64)
    y = x.copy()
    if x.shape[0] >= 3:
        y[1:-1] = (x[:-2] + x[1:-1] + x[2:]) / 3.0
    return y
