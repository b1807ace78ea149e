"""运行统计单元测试"""

import threading

import pytest

from avctc.utils.run_stats import RunStatistics


class TestRunStatistics:
    """RunStatistics"""

    def setup_method(self) -> None:
        self.stats = RunStatistics()

    def test_empty(self) -> None:
        stats = self.stats.get_stats()
        assert stats == {"jobs": 0, "successes": 0, "failures": 0, "skipped": 0, "max_concurrency": 0}
        self.stats.log_summary()

    def test_job_counts(self) -> None:
        for t in (1.0, 2.0, 3.0):
            self.stats.record_job(t, ok=True)
        self.stats.record_job(10.0, ok=False)
        self.stats.record_job(0.0, ok=True, skipped=True)

        stats = self.stats.get_stats()
        assert stats["jobs"] == 4
        assert (self.stats.successes, self.stats.failures, self.stats.skipped) == (3, 1, 1)
        assert stats["avg_time"] == pytest.approx(4.0)
        assert stats["p50"] == 3.0
        assert stats["p90"] == 10.0
        assert stats["max_time"] == 10.0

    def test_max_concurrency(self) -> None:
        with self.stats.track_process():
            with self.stats.track_process():
                assert self.stats.max_concurrency == 2
            with self.stats.track_process():
                pass
        assert self.stats.max_concurrency == 2

    def test_active_count_released_on_error(self) -> None:
        with pytest.raises(RuntimeError):
            with self.stats.track_process():
                raise RuntimeError("boom")
        with self.stats.track_process():
            pass
        assert self.stats.max_concurrency == 1

    def test_stage_times_and_ratio(self) -> None:
        self.stats.record_stage("anchor", "encode", 10.0)
        self.stats.record_stage("anchor", "encode", 10.0)
        self.stats.record_stage("test", "encode", 30.0)
        self.stats.record_stage("test", "decode", 1.0)

        assert self.stats.stage_seconds("anchor", "encode") == 20.0
        assert self.stats.stage_seconds("anchor", "decode") == 0.0
        assert self.stats.time_ratio("test", "anchor") == pytest.approx(1.5)
        assert self.stats.time_ratio("test", "anchor", "decode") is None
        assert self.stats.time_ratio("test", "missing") is None

    def test_thread_safety(self) -> None:
        def worker() -> None:
            for _ in range(200):
                self.stats.record_job(0.01, ok=True)
                self.stats.record_stage("c", "encode", 1.0)

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        assert self.stats.successes == 800
        assert self.stats.stage_seconds("c", "encode") == 800.0
