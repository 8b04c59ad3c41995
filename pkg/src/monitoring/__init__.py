# Monitoring Package
# 监控模块

from .monitoring import PipelineMonitor, get_monitor, reset_monitor

__all__ = ['PipelineMonitor', 'get_monitor', 'reset_monitor']
