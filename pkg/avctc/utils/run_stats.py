"""任务运行统计

- 记录每个任务的墙钟时间和成败
- 计算平均值、P50、P90
- 跟踪同时运行的外部进程数（最大并发）
- 按 codec 累计各阶段耗时，给出 codec 之间的耗时比

使用 threading.Lock 保护共享数据，执行器的协程和 to_thread 工作线程都可以写入。
"""

import logging
import math
import threading
from collections import defaultdict
from collections.abc import Iterator
from contextlib import contextmanager

logger = logging.getLogger(__name__)


class RunStatistics:
    """一批任务的统计收集器（线程安全）"""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._wall_times: list[float] = []
        self._successes = 0
        self._failures = 0
        self._skipped = 0
        self._active = 0
        self._max_active = 0
        # codec -> stage -> 累计秒数
        self._stage_times: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))

    # ========== 记录 ==========

    @contextmanager
    def track_process(self) -> Iterator[None]:
        """包住一次外部进程的生命周期，用于统计最大并发"""
        with self._lock:
            self._active += 1
            self._max_active = max(self._max_active, self._active)
        try:
            yield
        finally:
            with self._lock:
                self._active -= 1

    def record_stage(self, codec: str, stage: str, seconds: float) -> None:
        with self._lock:
            self._stage_times[codec][stage] += seconds

    def record_job(self, wall_time: float, ok: bool, skipped: bool = False) -> None:
        with self._lock:
            if skipped:
                self._skipped += 1
                return
            self._wall_times.append(wall_time)
            if ok:
                self._successes += 1
            else:
                self._failures += 1

    # ========== 查询 ==========

    @property
    def max_concurrency(self) -> int:
        with self._lock:
            return self._max_active

    @property
    def successes(self) -> int:
        with self._lock:
            return self._successes

    @property
    def failures(self) -> int:
        with self._lock:
            return self._failures

    @property
    def skipped(self) -> int:
        with self._lock:
            return self._skipped

    def stage_seconds(self, codec: str, stage: str) -> float:
        with self._lock:
            return self._stage_times.get(codec, {}).get(stage, 0.0)

    def time_ratio(self, codec: str, baseline: str, stage: str = "encode") -> float | None:
        """codec 与 baseline 在某阶段的累计耗时比；baseline 没有耗时记录时返回 None"""
        denominator = self.stage_seconds(baseline, stage)
        if denominator <= 0:
            return None
        return self.stage_seconds(codec, stage) / denominator

    def get_stats(self) -> dict[str, float | int]:
        """汇总统计

        Returns:
            包含 jobs / successes / failures / skipped / max_concurrency，
            有执行记录时另含 avg_time / p50 / p90 / max_time
        """
        with self._lock:
            times = sorted(self._wall_times)
            stats: dict[str, float | int] = {
                "jobs": len(times),
                "successes": self._successes,
                "failures": self._failures,
                "skipped": self._skipped,
                "max_concurrency": self._max_active,
            }

        if times:
            total = len(times)
            stats.update(
                avg_time=math.fsum(times) / total,
                p50=times[int(total * 0.50)],
                p90=times[min(int(total * 0.90), total - 1)],
                max_time=times[-1],
            )
        return stats

    def log_summary(self) -> None:
        stats = self.get_stats()
        if not stats["jobs"]:
            logger.info("📊 运行摘要 - 没有执行任何任务（跳过 %d 个）", stats["skipped"])
            return
        logger.info(
            "📊 运行摘要 - 执行: %d, 成功: %d, 失败: %d, 跳过: %d, 最大并发: %d, "
            "平均: %.2fs, P50: %.2fs, P90: %.2fs",
            stats["jobs"],
            stats["successes"],
            stats["failures"],
            stats["skipped"],
            stats["max_concurrency"],
            stats["avg_time"],
            stats["p50"],
            stats["p90"],
        )
