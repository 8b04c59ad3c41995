# Pipeline Configuration
# 全部超参数的唯一来源（pydantic 校验）

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Type

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from common.errors import ConfigurationError, DataValidationError

logger = logging.getLogger(__name__)

LOSS_TERMS = ('L2', 'L3', 'L4')


class _Settings(BaseModel):
    model_config = ConfigDict(extra='forbid', validate_assignment=True, frozen=False)


class LossWeights(_Settings):
    """
    损失权重 (ω_t, ω_rg, ω_rb, ω_rh, ω_fc, ω_2, ω_3, ω_4)
    """
    t: float = Field(1.0, ge=0, description="root translation term")
    rg: float = Field(1.0, ge=0, description="global orientation term")
    rb: float = Field(1.0, ge=0, description="body rotation term")
    rh: float = Field(1.0, ge=0, description="hand rotation term")
    fc: float = Field(1.0, ge=0, description="foot contact term")
    l2: float = Field(1.0, ge=0, description="rotation difference loss")
    l3: float = Field(5.0, ge=0, description="joint position loss")
    l4: float = Field(20.0, ge=0, description="wrist-local finger loss")

    def as_tuple(self):
        return (self.t, self.rg, self.rb, self.rh, self.fc, self.l2, self.l3, self.l4)


class GeneratorSettings(_Settings):
    """
    Transformer 生成器配置（默认是桌面规模）
    """
    layers: int = Field(2, ge=1)
    model_dim: int = Field(64, ge=1)
    heads: int = Field(2, ge=1)
    ff_dim: int = Field(128, ge=1)
    T: int = Field(30, ge=1, description="sequence length (frames = T + 1)")
    fps: float = Field(30.0, gt=0)
    learning_rate: float = Field(1e-4, gt=0)
    loss_weights: LossWeights = Field(default_factory=LossWeights)
    batch_size: int = Field(8, ge=1)
    train_steps: int = Field(5000, ge=1)
    bootstrap_steps: int = Field(300, ge=1)
    log_every: int = Field(100, ge=1)

    @model_validator(mode='after')
    def _check_heads(self):
        if self.model_dim % self.heads != 0:
            raise ValueError(f"model_dim {self.model_dim} is not divisible by heads {self.heads}")
        return self

    @classmethod
    def full_scale(cls, **overrides) -> 'GeneratorSettings':
        """8 层 / 512 维 / 4 头"""
        values = {'layers': 8, 'model_dim': 512, 'heads': 4, 'ff_dim': 2048}
        values.update(overrides)
        return cls(**values)

    def ablate(self, *terms: str) -> 'GeneratorSettings':
        """
        关闭指定的损失项（L2/L3/L4），返回新配置
        """
        weights = self.loss_weights.model_dump()
        for term in terms:
            key = term.upper()
            if key not in LOSS_TERMS:
                raise ConfigurationError(f"cannot disable loss term {term}; choose from {LOSS_TERMS}")
            weights[key.lower()] = 0.0
        return self.model_copy(update={'loss_weights': LossWeights(**weights)})


class FootRefineSettings(_Settings):
    contact_threshold: float = Field(0.5, ge=0, le=1)
    filter_airborne: bool = Field(True, description="mean-filter non-contact runs before blending")


class HandRefineSettings(_Settings):
    """
    手部后处理配置：α1..α5, δ, δ2, L, 迭代次数, 步长, 手腕锥约束
    """
    alpha1: float = Field(1.0, ge=0)
    alpha2: float = Field(1.0, ge=0)
    alpha3: float = Field(50.0, ge=0)
    alpha4: float = Field(100.0, ge=0)
    alpha5: float = Field(10.0, ge=0)
    delta: float = Field(0.004, ge=0, description="collision tolerance (m)")
    delta2: float = Field(0.012, gt=0, description="minimum inter-finger distance (m)")
    window: int = Field(15, ge=1, description="number of final frames optimized (L)")
    iterations: int = Field(40, ge=0)
    step_size: float = Field(1e-2, gt=0)
    max_backtracks: int = Field(10, ge=0)
    wrist_radius: float = Field(0.4, gt=0)
    cone_half_angle: float = Field(math.pi / 4, gt=0, le=math.pi)
    contact_floor: float = Field(0.002, ge=0, description="finger distance treated as contact (m)")
    e4_flip_sign: bool = False
    apply_mean_filter: bool = True


class MetricsSettings(_Settings):
    voxel_step: float = Field(0.005, gt=0)
    pskl_floor: float = Field(1e-8, gt=0)
    skating_mode: Literal['mean', 'sum'] = 'mean'
    inter_windows: List[int] = Field(default_factory=lambda: [1, 5, 10])

    @field_validator('inter_windows')
    @classmethod
    def _check_windows(cls, value):
        if not value or any(n < 1 for n in value) or sorted(value) != list(value):
            raise ValueError("inter_windows must be a non-empty ascending list of positive counts")
        return value


class SynthSettings(_Settings):
    count: int = Field(8, ge=1)
    object_shape: Literal['sphere', 'box', 'mixed'] = 'mixed'
    contact_speed: float = Field(0.01, gt=0, description="foot speed below which a frame is labeled contact (m/s)")
    scale_min: float = Field(0.9, gt=0)
    scale_max: float = Field(1.1, gt=0)

    @model_validator(mode='after')
    def _check_scale(self):
        if self.scale_min > self.scale_max:
            raise ValueError("scale_min must not exceed scale_max")
        return self


class RuntimeSettings(_Settings):
    seed: int = 0
    workers: int = Field(1, ge=1)
    apply_mean_filter: bool = Field(True, description="whole-sequence smoothing after generation")


class PipelineConfig(_Settings):
    """
    根配置
    """
    generator: GeneratorSettings = Field(default_factory=GeneratorSettings)
    foot_refine: FootRefineSettings = Field(default_factory=FootRefineSettings)
    hand_refine: HandRefineSettings = Field(default_factory=HandRefineSettings)
    metrics: MetricsSettings = Field(default_factory=MetricsSettings)
    synth: SynthSettings = Field(default_factory=SynthSettings)
    pipeline: RuntimeSettings = Field(default_factory=RuntimeSettings)


def _missing_fields(model: Type[BaseModel], data: Dict[str, Any], prefix: str = '') -> List[str]:
    missing = []
    for name, info in model.model_fields.items():
        path = f"{prefix}{name}"
        if name not in data:
            missing.append(path)
            continue
        annotation = info.annotation
        if isinstance(annotation, type) and issubclass(annotation, BaseModel) and isinstance(data[name], dict):
            missing.extend(_missing_fields(annotation, data[name], f"{path}."))
    return missing


def config_from_dict(data: Dict[str, Any], path: str = '<dict>', require_all: bool = True) -> PipelineConfig:
    """
    从字典构造配置

    Args:
        data: 配置字典
        path: 来源（用于错误信息）
        require_all: 是否要求所有字段都出现

    Returns:
        PipelineConfig
    """
    if not isinstance(data, dict):
        raise DataValidationError("config root must be an object", path=path)
    if require_all:
        missing = _missing_fields(PipelineConfig, data)
        if missing:
            raise DataValidationError(f"missing config field {missing[0]}"
                                      + (f" (and {len(missing) - 1} more)" if len(missing) > 1 else ''), path=path)
    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = '.'.join(str(part) for part in first['loc'])
        raise DataValidationError(f"invalid config field {location}: {first['msg']}", path=path)


def load_config(path) -> PipelineConfig:
    """
    读取 JSON 配置文件，所有字段都必须给出，未知字段被拒绝
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise DataValidationError(f"cannot read config: {str(e)}", path=str(path))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DataValidationError(f"malformed JSON: {e.msg}", path=str(path), line=e.lineno)
    config = config_from_dict(data, path=str(path))
    logger.info(f"Loaded pipeline config from {path}")
    return config


def save_config(config: PipelineConfig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config.model_dump(), indent=2), encoding='utf-8')
    logger.info(f"Saved pipeline config to {path}")
