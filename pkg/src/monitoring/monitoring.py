# Monitoring
# Prometheus 指标：阶段计数与耗时、训练损失、后处理能量、进程内存

import logging
import os

import psutil
from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

logger = logging.getLogger(__name__)


class PipelineMonitor:
    """
    流水线指标集合（使用独立的 CollectorRegistry，不启动 HTTP 服务）
    """

    def __init__(self, registry=None):
        self.registry = registry or CollectorRegistry()

        # 阶段计数
        self.stage_count = Counter(
            'graspmotion_stage_count',
            'Total number of pipeline stage runs',
            ['stage', 'success'],
            registry=self.registry
        )

        # 阶段耗时
        self.stage_latency = Histogram(
            'graspmotion_stage_latency_seconds',
            'Pipeline stage latency in seconds',
            ['stage'],
            registry=self.registry
        )

        self.training_loss = Gauge(
            'graspmotion_training_loss',
            'Latest generator training loss per term',
            ['term'],
            registry=self.registry
        )

        self.refinement_energy = Gauge(
            'graspmotion_refinement_energy',
            'Latest hand refinement energy per term',
            ['term'],
            registry=self.registry
        )

        self.memory_usage = Gauge(
            'graspmotion_process_memory_bytes',
            'Resident memory of the pipeline process',
            registry=self.registry
        )

    def record_stage(self, stage: str, success: bool, latency: float):
        """记录一次阶段执行"""
        self.stage_count.labels(stage=stage, success=str(bool(success)).lower()).inc()
        self.stage_latency.labels(stage=stage).observe(latency)

    def set_training_loss(self, terms):
        for term, value in terms.items():
            if term != 'step':
                self.training_loss.labels(term=term).set(float(value))

    def set_refinement_energy(self, terms):
        for term, value in terms.items():
            self.refinement_energy.labels(term=term).set(float(value))

    def update_system_resources(self) -> int:
        """更新进程内存使用"""
        try:
            rss = psutil.Process(os.getpid()).memory_info().rss
            self.memory_usage.set(rss)
            return rss
        except Exception as e:
            logger.warning(f"Error updating system resources: {str(e)}")
            return 0

    def write(self, path):
        """
        将当前指标写入 Prometheus 文本格式文件
        """
        self.update_system_resources()
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        write_to_textfile(str(path), self.registry)
        logger.info(f"Metrics written to {path}")


_monitor = None


def get_monitor() -> PipelineMonitor:
    """进程内共享的监控实例"""
    global _monitor
    if _monitor is None:
        _monitor = PipelineMonitor()
    return _monitor


def reset_monitor() -> PipelineMonitor:
    global _monitor
    _monitor = PipelineMonitor()
    return _monitor
