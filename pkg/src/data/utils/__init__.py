# Data Utils Package

from .worker_pool import WorkerPool

__all__ = ['WorkerPool']
