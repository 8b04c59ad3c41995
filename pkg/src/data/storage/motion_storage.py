# Motion Storage
# 文件格式：动作（JSON）、点云（文本）、骨架（JSON）、场景（JSON），带行号的错误诊断

import json
import logging
import os
import re
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from common.errors import DataValidationError
from kinematics.pose import BODY_SLICE, HAND_SLICE, NUM_BODY_ROTATIONS, NUM_HAND_ROTATIONS, PHI_SLICE, POSE_DIM, \
    T_SLICE, vector_to_matrices
from kinematics.skeleton import Skeleton
from motion.sequence import MotionSequence
from refinement.hand.object_cloud import NUM_OBJECT_POINTS, ObjectCloud

logger = logging.getLogger(__name__)

MOTION_FORMAT = 'graspmotion.motion'
SCENE_FORMAT = 'graspmotion.scene'
CLOUD_HEADER = 'graspmotion.cloud v1'
FORMAT_VERSION = 1
CLOUD_NORMAL_TOL = 1e-4

_MOTION_FIELDS = {'format', 'version', 'fps', 'skeleton', 'frames', 'contact'}
_FRAME_FIELDS = {'t': (3,), 'phi': (6,), 'body': (NUM_BODY_ROTATIONS, 6), 'rhand': (NUM_HAND_ROTATIONS, 6)}
_SCENE_FIELDS = {'format', 'version', 'seed', 'object', 'scale', 'start_motion', 'target_motion', 'cloud'}
_OBJECT_FIELDS = {'shape', 'radius', 'half_extents', 'center'}


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise DataValidationError(f"cannot read file: {str(e)}", path=str(path))


def _read_json(path) -> Tuple[Any, str]:
    text = _read_text(path)
    try:
        return json.loads(text), text
    except json.JSONDecodeError as e:
        raise DataValidationError(f"malformed JSON: {e.msg}", path=str(path), line=e.lineno)


def _array_element_lines(text: str, key: str) -> List[int]:
    """
    顶层数组字段中每个元素起始处的行号（用于定位出错的帧）
    """
    match = re.search(r'"%s"\s*:\s*\[' % re.escape(key), text)
    if match is None:
        return []
    decoder = json.JSONDecoder()
    whitespace = re.compile(r'\s*')
    pos = match.end()
    lines = []
    try:
        while True:
            pos = whitespace.match(text, pos).end()
            if text[pos] == ']':
                break
            lines.append(text.count('\n', 0, pos) + 1)
            _, pos = decoder.raw_decode(text, pos)
            pos = whitespace.match(text, pos).end()
            if text[pos] == ',':
                pos += 1
    except (ValueError, IndexError):
        pass
    return lines


def _write_json(path, data: Dict[str, Any], row_keys=()):
    """
    写 JSON；row_keys 中的数组每个元素单独占一行，便于比对与定位
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    parts = []
    for key, value in data.items():
        if key in row_keys and isinstance(value, list):
            rows = ',\n'.join(f"    {json.dumps(item)}" for item in value)
            parts.append(f"  {json.dumps(key)}: [\n{rows}\n  ]")
        else:
            parts.append(f"  {json.dumps(key)}: {json.dumps(value)}")
    path.write_text('{\n' + ',\n'.join(parts) + '\n}\n', encoding='utf-8')


def _check_header(data, path, expected_format: str):
    if not isinstance(data, dict):
        raise DataValidationError("file root must be an object", path=str(path), line=1)
    if data.get('format') != expected_format:
        raise DataValidationError(f"expected format {expected_format!r}, got {data.get('format')!r}", path=str(path))
    if data.get('version') != FORMAT_VERSION:
        raise DataValidationError(
            f"unsupported version {data.get('version')!r}, expected {FORMAT_VERSION}", path=str(path)
        )


# ---------------------------------------------------------------- skeleton

def load_skeleton(path) -> Skeleton:
    """读取骨架 JSON"""
    data, _ = _read_json(path)
    if not isinstance(data, dict):
        raise DataValidationError("skeleton root must be an object", path=str(path), line=1)
    try:
        return Skeleton.from_dict(data)
    except DataValidationError as e:
        raise DataValidationError(str(e), path=str(path)) from e
    except (TypeError, ValueError) as e:
        raise DataValidationError(f"invalid skeleton: {str(e)}", path=str(path)) from e


def save_skeleton(path, skeleton: Skeleton):
    _write_json(path, skeleton.to_dict())


def _resolve_skeleton(reference, path) -> Skeleton:
    if isinstance(reference, dict):
        try:
            return Skeleton.from_dict(reference)
        except DataValidationError as e:
            raise DataValidationError(f"inline skeleton: {str(e)}", path=str(path)) from e
    if isinstance(reference, str):
        candidate = Path(reference)
        if not candidate.is_absolute():
            candidate = Path(path).parent / candidate
        return load_skeleton(candidate)
    raise DataValidationError("skeleton must be a path string or an inline object", path=str(path))


# ---------------------------------------------------------------- motion

def frame_to_dict(x) -> Dict[str, Any]:
    x = np.asarray(x, dtype=np.float64)
    return {
        't': x[T_SLICE].tolist(),
        'phi': x[PHI_SLICE].tolist(),
        'body': x[BODY_SLICE].reshape(NUM_BODY_ROTATIONS, 6).tolist(),
        'rhand': x[HAND_SLICE].reshape(NUM_HAND_ROTATIONS, 6).tolist()
    }


def frame_from_dict(frame: Dict[str, Any]) -> np.ndarray:
    """
    单帧字典 -> 225 维向量

    Raises:
        DataValidationError: 字段缺失、多余或维度不符
    """
    if not isinstance(frame, dict):
        raise DataValidationError("frame must be an object")
    unknown = set(frame) - set(_FRAME_FIELDS)
    if unknown:
        raise DataValidationError(f"unknown frame fields {sorted(unknown)}")
    parts = []
    for key, shape in _FRAME_FIELDS.items():
        if key not in frame:
            raise DataValidationError(f"missing frame field {key!r}")
        try:
            value = np.asarray(frame[key], dtype=np.float64)
        except (TypeError, ValueError):
            raise DataValidationError(f"field {key!r} is not numeric")
        if value.shape != shape:
            raise DataValidationError(f"field {key!r} has shape {value.shape}, expected {shape}")
        parts.append(value.reshape(-1))
    x = np.concatenate(parts)
    if x.shape != (POSE_DIM,):
        raise DataValidationError(f"frame has dimension {x.shape[0]}, expected {POSE_DIM}")
    return x


def save_motion(path, sequence: MotionSequence, skeleton: Union[str, Skeleton]):
    """
    保存动作文件（浮点数按 repr 精度写出，读回逐位相同）

    Args:
        path: 输出路径
        sequence: 动作序列
        skeleton: 骨架文件路径（字符串）或内联骨架
    """
    data = {
        'format': MOTION_FORMAT,
        'version': FORMAT_VERSION,
        'fps': sequence.fps,
        'skeleton': skeleton if isinstance(skeleton, str) else skeleton.to_dict(),
        'frames': [frame_to_dict(x) for x in sequence.params],
        'contact': None if sequence.contact_probs is None else sequence.contact_probs.tolist()
    }
    _write_json(path, data, row_keys=('frames', 'contact'))
    logger.debug(f"Saved motion with {sequence.num_frames} frames to {path}")


def load_motion(path, skeleton: Optional[Skeleton] = None) -> Tuple[MotionSequence, Skeleton]:
    """
    读取动作文件

    Args:
        path: 文件路径
        skeleton: 显式给出的骨架（为空时按文件中的引用解析）

    Returns:
        (MotionSequence, Skeleton)
    """
    data, text = _read_json(path)
    _check_header(data, path, MOTION_FORMAT)
    unknown = set(data) - _MOTION_FIELDS
    if unknown:
        raise DataValidationError(f"unknown motion fields {sorted(unknown)}", path=str(path))
    for key in ('fps', 'skeleton', 'frames'):
        if key not in data:
            raise DataValidationError(f"missing motion field {key!r}", path=str(path))

    frames = data['frames']
    if not isinstance(frames, list):
        raise DataValidationError("frames must be a list", path=str(path))
    lines = _array_element_lines(text, 'frames')
    params = []
    for i, frame in enumerate(frames):
        line = lines[i] if i < len(lines) else None
        try:
            x = frame_from_dict(frame)
            vector_to_matrices(x)
        except DataValidationError as e:
            raise DataValidationError(f"frame {i}: {str(e)}", path=str(path), line=line) from e
        params.append(x)
    if len(params) < 2:
        raise DataValidationError(f"motion needs at least 2 frames, got {len(params)}", path=str(path))

    contact = data.get('contact')
    if contact is not None:
        contact = np.asarray(contact, dtype=np.float64)
        if contact.shape != (len(params), 2):
            raise DataValidationError(
                f"contact has shape {contact.shape}, expected ({len(params)}, 2)", path=str(path)
            )
    if skeleton is None:
        skeleton = _resolve_skeleton(data['skeleton'], path)
    try:
        sequence = MotionSequence(np.stack(params), float(data['fps']), contact)
    except DataValidationError as e:
        raise DataValidationError(str(e), path=str(path)) from e
    return sequence, skeleton


# ---------------------------------------------------------------- cloud

def save_cloud(path, cloud: ObjectCloud):
    """保存点云：注释头 + 4096 行 'x y z nx ny nz'（%.17g）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.hstack([cloud.points, cloud.normals]), fmt='%.17g', header=CLOUD_HEADER, comments='# ')


def load_cloud(path) -> ObjectCloud:
    """
    读取点云文本文件

    法向在 1e-4 以内视为单位向量并重新归一化；点数必须恰为 4096。
    """
    rows = []
    for number, raw in enumerate(_read_text(path).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = line.split()
        if len(fields) != 6:
            raise DataValidationError(f"expected 6 values per point, got {len(fields)}", path=str(path), line=number)
        try:
            values = [float(v) for v in fields]
        except ValueError:
            raise DataValidationError(f"non-numeric value in {line!r}", path=str(path), line=number)
        norm = float(np.linalg.norm(values[3:]))
        if abs(norm - 1.0) > CLOUD_NORMAL_TOL:
            raise DataValidationError(f"normal is not unit length (norm {norm:.6f})", path=str(path), line=number)
        rows.append(values)
    if len(rows) != NUM_OBJECT_POINTS:
        raise DataValidationError(f"cloud has {len(rows)} points, expected {NUM_OBJECT_POINTS}", path=str(path))
    data = np.asarray(rows, dtype=np.float64)
    normals = data[:, 3:]
    norms = np.linalg.norm(normals, axis=1, keepdims=True)
    # 已是单位长度的法向保持原值，保证读写往返逐位一致
    normals = np.where(np.abs(norms - 1.0) > 1e-12, normals / norms, normals)
    return ObjectCloud(data[:, :3], normals)


# ---------------------------------------------------------------- scene

@dataclass(frozen=True)
class SceneSpec:
    """
    场景描述：物体形状与尺寸、随机种子、骨架缩放，可选的外部动作/点云文件
    """
    seed: int
    shape: str
    size: Tuple[float, ...]
    scale: float = 1.0
    center: Optional[Tuple[float, float, float]] = None
    start_motion: Optional[str] = None
    target_motion: Optional[str] = None
    cloud: Optional[str] = None
    source: Optional[str] = field(default=None, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        obj: Dict[str, Any] = {'shape': self.shape}
        if self.shape == 'sphere':
            obj['radius'] = self.size[0]
        else:
            obj['half_extents'] = list(self.size)
        if self.center is not None:
            obj['center'] = list(self.center)
        data = {'format': SCENE_FORMAT, 'version': FORMAT_VERSION, 'seed': self.seed, 'object': obj,
                'scale': self.scale}
        for key in ('start_motion', 'target_motion', 'cloud'):
            if getattr(self, key) is not None:
                data[key] = getattr(self, key)
        return data

    def resolve(self, name: str) -> Optional[str]:
        """相对路径按场景文件所在目录解析"""
        value = getattr(self, name)
        if value is None or self.source is None or os.path.isabs(value):
            return value
        return str(Path(self.source).parent / value)


def load_scene(path) -> SceneSpec:
    data, _ = _read_json(path)
    _check_header(data, path, SCENE_FORMAT)
    unknown = set(data) - _SCENE_FIELDS
    if unknown:
        raise DataValidationError(f"unknown scene fields {sorted(unknown)}", path=str(path))
    obj = data.get('object')
    if not isinstance(obj, dict):
        raise DataValidationError("scene needs an 'object' description", path=str(path))
    unknown = set(obj) - _OBJECT_FIELDS
    if unknown:
        raise DataValidationError(f"unknown scene.object fields {sorted(unknown)}", path=str(path))
    shape = obj.get('shape')
    if shape == 'sphere':
        if 'radius' not in obj:
            raise DataValidationError("sphere object needs 'radius'", path=str(path))
        size = (float(obj['radius']),)
    elif shape == 'box':
        extents = obj.get('half_extents')
        if not isinstance(extents, list) or len(extents) != 3:
            raise DataValidationError("box object needs 3 'half_extents'", path=str(path))
        size = tuple(float(v) for v in extents)
    else:
        raise DataValidationError(f"unknown object shape {shape!r}", path=str(path))
    if any(v <= 0 for v in size):
        raise DataValidationError("object dimensions must be positive", path=str(path))
    center = obj.get('center')
    if center is not None and len(center) != 3:
        raise DataValidationError("object center must have 3 coordinates", path=str(path))
    return SceneSpec(
        seed=int(data.get('seed', 0)),
        shape=shape,
        size=size,
        scale=float(data.get('scale', 1.0)),
        center=None if center is None else tuple(float(v) for v in center),
        start_motion=data.get('start_motion'),
        target_motion=data.get('target_motion'),
        cloud=data.get('cloud'),
        source=str(path)
    )


def save_scene(path, scene: SceneSpec):
    _write_json(path, scene.to_dict())


class StorageManager:
    """
    存储管理器
    管理一次运行的输出目录：阶段动作文件与失败标记
    """

    def __init__(self, config=None):
        """
        初始化存储管理器

        Args:
            config: 配置参数（output_dir）
        """
        self.config = config or {}
        self.logger = logging.getLogger(__name__)
        self.output_dir = Path(self.config.get('output_dir', './output'))

    def path(self, *parts) -> Path:
        return self.output_dir.joinpath(*parts)

    def store_motion(self, name: str, sequence: MotionSequence, skeleton: Union[str, Skeleton]) -> Path:
        target = self.path(f"{name}.motion.json")
        save_motion(target, sequence, skeleton)
        return target

    def mark_failed(self, name: str, stage: str, error: BaseException) -> Path:
        """
        写失败标记文件 <name>.FAILED（已写出的阶段文件保留）
        """
        marker = self.path(f"{name}.FAILED")
        marker.parent.mkdir(parents=True, exist_ok=True)
        marker.write_text(json.dumps({
            'stage': stage,
            'error': str(error),
            'error_type': type(error).__name__,
            'timestamp': datetime.now().isoformat()
        }, indent=2), encoding='utf-8')
        self.logger.warning(f"Marked {name} as failed at stage {stage}: {str(error)}")
        return marker
