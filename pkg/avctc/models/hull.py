"""凸包模型

HullPoint 是带来源分辨率的 RD 点（实测或加密插值）；
ConvexHull 是所有分辨率并集上的 Pareto 前沿，码率和质量都严格递增。
"""

import bisect
import math

from pydantic import BaseModel, ConfigDict, Field, field_validator

from avctc.models.rd import MetricId

Resolution = tuple[int, int]

# 包络比较容差（质量单位）
ENVELOPE_TOLERANCE = 1e-9


class HullPoint(BaseModel):
    """凸包输入 / 输出点"""

    model_config = ConfigDict(frozen=True)

    bitrate_kbps: float = Field(..., gt=0)
    quality: float
    source_resolution: Resolution
    qp: int | None = None  # 插值点为 None
    interpolated: bool = False

    @property
    def log_rate(self) -> float:
        return math.log(self.bitrate_kbps)


class ConvexHull(BaseModel):
    """(log 码率, 质量) 平面上的上凸包，按码率升序"""

    model_config = ConfigDict(frozen=True)

    metric_id: MetricId
    points: tuple[HullPoint, ...] = Field(..., min_length=1)
    sequence: str = ""

    @field_validator("points")
    @classmethod
    def validate_pareto(cls, v: tuple[HullPoint, ...]) -> tuple[HullPoint, ...]:
        for lower, upper in zip(v, v[1:], strict=False):
            if not upper.bitrate_kbps > lower.bitrate_kbps:
                raise ValueError(f"凸包码率必须严格递增: {lower.bitrate_kbps} -> {upper.bitrate_kbps}")
            if not upper.quality > lower.quality:
                raise ValueError(f"凸包质量必须严格递增: {lower.quality} -> {upper.quality}")
        return v

    @property
    def rates(self) -> list[float]:
        return [p.bitrate_kbps for p in self.points]

    @property
    def qualities(self) -> list[float]:
        return [p.quality for p in self.points]

    def quality_at(self, bitrate_kbps: float) -> float | None:
        """前沿在给定码率处的质量

        相邻顶点之间按 log 码率线性插值；高于最大码率时取最高质量，
        低于最小码率时前沿不覆盖，返回 None。
        """
        rates = self.rates
        if bitrate_kbps < rates[0]:
            return None
        if bitrate_kbps >= rates[-1]:
            return self.points[-1].quality

        i = bisect.bisect_right(rates, bitrate_kbps) - 1
        lo, hi = self.points[i], self.points[i + 1]
        t = (math.log(bitrate_kbps) - lo.log_rate) / (hi.log_rate - lo.log_rate)
        return lo.quality + t * (hi.quality - lo.quality)

    def dominates(self, point: HullPoint, tol: float = ENVELOPE_TOLERANCE) -> bool:
        """前沿在该点码率处的质量不低于该点质量"""
        q = self.quality_at(point.bitrate_kbps)
        return q is not None and point.quality <= q + tol

    def measured_points(self) -> list[HullPoint]:
        return [p for p in self.points if not p.interpolated]
