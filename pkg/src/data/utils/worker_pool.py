# Worker Pool
# 按序列并行处理的线程池，结果按输入顺序返回

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar('T')
R = TypeVar('R')


class WorkerPool:
    """
    线程池
    workers = 1 时在当前线程顺序执行
    """

    def __init__(self, workers: int = 1):
        """
        初始化线程池

        Args:
            workers: 工作线程数
        """
        self.workers = max(1, int(workers))
        self.logger = logging.getLogger(__name__)
        self.executor = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 1 else None

    def map(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """
        对每个元素执行 func

        Returns:
            与输入顺序一致的结果列表
        """
        items = list(items)
        if self.executor is None:
            return [func(item) for item in items]
        futures = [self.executor.submit(func, item) for item in items]
        self.logger.debug(f"Submitted {len(futures)} tasks to {self.workers} workers")
        return [future.result() for future in futures]

    def shutdown(self):
        if self.executor is not None:
            self.executor.shutdown(wait=True)
            self.executor = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.shutdown()
        return False
