# 异常与退出码测试用例

from common.errors import (
    EXIT_DATA,
    EXIT_NUMERICAL,
    ConfigurationError,
    DataValidationError,
    DegenerateRotationError,
    EnergyDivergenceError,
    StageFailedError,
    TrainingDivergenceError,
    exit_code_for
)


class TestErrors:
    """
    异常层次结构测试类
    """

    def test_exit_codes(self):
        """
        测试异常类型对应的退出码
        """
        assert exit_code_for(DataValidationError("bad")) == EXIT_DATA
        assert exit_code_for(DegenerateRotationError("zero")) == EXIT_DATA
        assert exit_code_for(ConfigurationError("shape")) == EXIT_DATA
        assert exit_code_for(TrainingDivergenceError("nan", [])) == EXIT_NUMERICAL
        assert exit_code_for(EnergyDivergenceError("inf", {})) == EXIT_NUMERICAL
        assert exit_code_for(FloatingPointError()) == EXIT_NUMERICAL

    def test_stage_failure_wraps_cause(self):
        """
        测试阶段内未预期异常的包装：保留阶段名与原始异常，退出码为 3
        """
        error = StageFailedError("refine-feet", RuntimeError("x"))
        assert exit_code_for(error) == EXIT_NUMERICAL
        assert error.stage == "refine-feet"
        assert isinstance(error.cause, RuntimeError)
        assert str(error) == "stage refine-feet failed: RuntimeError: x"

    def test_location_in_message(self):
        """
        测试错误信息带文件路径和行号
        """
        error = DataValidationError("unexpected field", path='walk.motion.json', line=12)
        assert str(error) == "walk.motion.json:12: unexpected field"
        assert error.line == 12

        error = DataValidationError("missing", path='cfg.json')
        assert str(error) == "cfg.json: missing"
