# Motion Transformer
# Transformer 编码器：插值序列 + 骨架 token -> 每帧姿态偏差 ΔX 与双脚触地概率

import numpy as np
import tensorflow as tf

from kinematics.pose import POSE_DIM
from motion.sequence import EXTENDED_DIM

TOKEN_DIM = EXTENDED_DIM + 1


def positional_encoding(length: int, depth: int) -> np.ndarray:
    """
    正弦位置编码 (length, depth)
    """
    positions = np.arange(length)[:, None]
    rates = 1.0 / np.power(10000.0, (2 * (np.arange(depth)[None, :] // 2)) / np.float64(depth))
    angles = positions * rates
    encoding = np.zeros((length, depth))
    encoding[:, 0::2] = np.sin(angles[:, 0::2])
    encoding[:, 1::2] = np.cos(angles[:, 1::2])
    return encoding.astype(np.float32)


class EncoderLayer(tf.keras.layers.Layer):
    """
    后归一化编码层：自注意力 + 前馈网络，各自带残差与 LayerNorm
    """

    def __init__(self, model_dim: int, heads: int, ff_dim: int, **kwargs):
        super().__init__(**kwargs)
        self.attention = tf.keras.layers.MultiHeadAttention(num_heads=heads, key_dim=model_dim // heads)
        self.ff_hidden = tf.keras.layers.Dense(ff_dim, activation='relu')
        self.ff_out = tf.keras.layers.Dense(model_dim)
        self.norm1 = tf.keras.layers.LayerNormalization(epsilon=1e-6)
        self.norm2 = tf.keras.layers.LayerNormalization(epsilon=1e-6)

    def call(self, x, training=False):
        x = self.norm1(x + self.attention(x, x, training=training))
        return self.norm2(x + self.ff_out(self.ff_hidden(x)))


class MotionTransformer(tf.keras.Model):
    """
    动作生成网络

    输入：帧 token [Z_i, m_i] (B, N, 337) 与骨长向量 k (B, K)；
    输出：ΔX (B, N, 225) 与触地概率 (B, N, 2)。
    """

    def __init__(self, layers: int, model_dim: int, heads: int, ff_dim: int, max_frames: int, **kwargs):
        super().__init__(**kwargs)
        self.model_dim = model_dim
        self.max_frames = max_frames
        self.frame_embedding = tf.keras.layers.Dense(model_dim, name='frame_embedding')
        self.skeleton_embedding = tf.keras.layers.Dense(model_dim, name='skeleton_embedding')
        self.encoder = [EncoderLayer(model_dim, heads, ff_dim, name=f"encoder_{i}") for i in range(layers)]
        # 零初始化：未训练的网络输出恰为插值序列
        self.delta_head = tf.keras.layers.Dense(
            POSE_DIM, kernel_initializer='zeros', bias_initializer='zeros', name='delta_head'
        )
        self.contact_head = tf.keras.layers.Dense(2, activation='sigmoid', name='contact_head')
        self.position_table = tf.constant(positional_encoding(max_frames, model_dim))

    def call(self, inputs, training=False):
        tokens, bone_lengths = inputs
        frames = tf.shape(tokens)[1]
        x = self.frame_embedding(tokens) + self.position_table[None, :frames]
        skeleton_token = self.skeleton_embedding(bone_lengths)[:, None, :]
        x = tf.concat([skeleton_token, x], axis=1)
        for layer in self.encoder:
            x = layer(x, training=training)
        x = x[:, 1:]
        return self.delta_head(x), self.contact_head(x)
