# Error Types
# 统一的异常层次结构，CLI 根据异常类型决定退出码

from typing import Any, Dict, List, Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class GraspMotionError(Exception):
    """
    所有业务异常的基类
    """

    exit_code = EXIT_DATA


class ConfigurationError(GraspMotionError):
    """
    配置错误（参数越界、权重与配置形状不匹配等）
    """


class DataValidationError(GraspMotionError):
    """
    数据校验错误，可携带文件路径和行号

    Args:
        message: 错误描述
        path: 出错文件路径
        line: 出错行号（从1开始）
    """

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ''
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")


class DegenerateRotationError(DataValidationError):
    """
    6D 旋转向量退化（零向量或两向量平行）
    """


class InvalidLengthError(DataValidationError):
    """
    序列长度不合法
    """


class MetricUndefinedError(DataValidationError):
    """
    指标在当前输入上无定义
    """


class NumericalError(GraspMotionError):
    """
    数值失败（出现 NaN/Inf）
    """

    exit_code = EXIT_NUMERICAL


class TrainingDivergenceError(NumericalError):
    """
    训练发散，携带到目前为止的损失轨迹
    """

    def __init__(self, message: str, trace: Optional[List[Dict[str, float]]] = None):
        self.trace = trace or []
        super().__init__(message)


class EnergyDivergenceError(NumericalError):
    """
    手部优化能量非有限，携带各项能量的诊断信息
    """

    def __init__(self, message: str, terms: Optional[Dict[str, Any]] = None):
        self.terms = terms or {}
        super().__init__(f"{message} (terms: {self.terms})")


class StageFailedError(NumericalError):
    """
    流水线阶段内的未预期异常，保留原始异常
    """

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {type(cause).__name__}: {cause}")


def exit_code_for(error: BaseException) -> int:
    """
    根据异常类型返回 CLI 退出码

    Args:
        error: 异常对象

    Returns:
        退出码
    """
    if isinstance(error, GraspMotionError):
        return error.exit_code
    return EXIT_NUMERICAL if isinstance(error, (FloatingPointError, ArithmeticError)) else EXIT_DATA
