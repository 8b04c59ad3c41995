# 线程池测试用例

import threading
import time

from data.utils.worker_pool import WorkerPool


class TestWorkerPool:
    """
    线程池测试类
    """

    def test_results_in_input_order(self):
        """
        测试多线程结果按输入顺序返回
        """
        def work(i):
            time.sleep(0.002 * (5 - i))
            return i * i

        with WorkerPool(4) as pool:
            assert pool.map(work, range(6)) == [0, 1, 4, 9, 16, 25]
        assert pool.executor is None

    def test_single_worker_runs_inline(self):
        """
        测试单线程时在当前线程执行
        """
        caller = threading.get_ident()
        pool = WorkerPool(1)
        assert pool.map(lambda _: threading.get_ident(), [1, 2]) == [caller, caller]
        assert WorkerPool(0).workers == 1
