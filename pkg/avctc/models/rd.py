"""率失真（RD）数据模型

RDPoint 是一个 (码率, 质量) 采样；RDCurve 是某序列、某配置、某指标下
按码率升序排列的采样集合。
"""

from collections.abc import Iterable
from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from avctc.exceptions import CurveError
from avctc.models.sequence import CodingConfig, SequenceInfo


class MetricId(str, Enum):
    """质量指标"""

    PSNR_Y = "PSNR_Y"
    PSNR_U = "PSNR_U"
    PSNR_V = "PSNR_V"
    PSNR_YUV = "PSNR_YUV"
    SSIM = "SSIM"
    MS_SSIM = "MS_SSIM"
    VMAF = "VMAF"
    CIEDE2000 = "CIEDE2000"
    PSNR_HVS = "PSNR_HVS"
    CAMBI = "CAMBI"

    @property
    def saturating(self) -> bool:
        """高码率段会饱和（平台区）的指标，BD-rate 前需剔除饱和点"""
        return self in _SATURATING

    @property
    def label(self) -> str:
        """报表列名"""
        return _LABELS.get(self, self.value)


_SATURATING = frozenset({MetricId.VMAF, MetricId.SSIM, MetricId.MS_SSIM, MetricId.CAMBI})

_LABELS = {
    MetricId.PSNR_Y: "PSNR-Y",
    MetricId.PSNR_U: "PSNR-U",
    MetricId.PSNR_V: "PSNR-V",
    MetricId.PSNR_YUV: "PSNR-YUV",
    MetricId.MS_SSIM: "MS-SSIM",
    MetricId.PSNR_HVS: "PSNR-HVS",
}


class QpSet(BaseModel):
    """一组 6 个 qindex 值（0-255，严格递增）"""

    model_config = ConfigDict(frozen=True)

    qps: tuple[int, int, int, int, int, int]

    @field_validator("qps")
    @classmethod
    def validate_qps(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(q < 0 or q > 255 for q in v):
            raise ValueError(f"QP 必须在 [0, 255] 内: {v}")
        if any(b <= a for a, b in zip(v, v[1:], strict=False)):
            raise ValueError(f"QP 必须严格递增: {v}")
        return v

    def as_list(self) -> list[int]:
        return list(self.qps)


class RDPoint(BaseModel):
    """一个率失真采样点"""

    model_config = ConfigDict(frozen=True)

    qp: int | None = None
    bitrate_kbps: float = Field(
        ..., gt=0, allow_inf_nan=False, description="码率（kbps），对数域运算要求 > 0"
    )
    quality: float
    metric_id: MetricId
    interpolated: bool = False

    def __init__(self, **data: Any) -> None:
        """字段校验失败（如码率 ≤ 0）统一报 CurveError"""
        try:
            super().__init__(**data)
        except ValidationError as e:
            raise CurveError(f"RD 点无效 (QP {data.get('qp')}): {e}") from e


class RDCurve(BaseModel):
    """某序列某指标的 RD 曲线（码率严格递增）"""

    model_config = ConfigDict(frozen=True)

    sequence: str
    config: CodingConfig
    metric_id: MetricId
    points: tuple[RDPoint, ...]
    info: SequenceInfo | None = None
    resolution: tuple[int, int] | None = None

    @field_validator("points")
    @classmethod
    def sort_points(cls, v: tuple[RDPoint, ...]) -> tuple[RDPoint, ...]:
        """按码率升序排列，拒绝重复码率"""
        ordered = tuple(sorted(v, key=lambda p: p.bitrate_kbps))
        for lower, upper in zip(ordered, ordered[1:], strict=False):
            if upper.bitrate_kbps <= lower.bitrate_kbps:
                raise ValueError(f"码率重复: {upper.bitrate_kbps} kbps")
        return ordered

    @classmethod
    def from_points(
        cls,
        sequence: str,
        config: CodingConfig,
        metric_id: MetricId,
        points: Iterable[RDPoint],
        *,
        info: SequenceInfo | None = None,
        resolution: tuple[int, int] | None = None,
    ) -> "RDCurve":
        """构造曲线，校验失败时抛出 CurveError"""
        try:
            return cls(
                sequence=sequence,
                config=config,
                metric_id=metric_id,
                points=tuple(points),
                info=info,
                resolution=resolution,
            )
        except ValidationError as e:
            raise CurveError(f"RD 曲线无效 ({sequence}/{metric_id.value}): {e}") from e

    def with_points(self, points: Iterable[RDPoint]) -> "RDCurve":
        """返回同一身份、不同采样点的新曲线"""
        return RDCurve.from_points(
            self.sequence,
            self.config,
            self.metric_id,
            points,
            info=self.info,
            resolution=self.resolution,
        )

    @property
    def rates(self) -> list[float]:
        return [p.bitrate_kbps for p in self.points]

    @property
    def qualities(self) -> list[float]:
        return [p.quality for p in self.points]

    def __len__(self) -> int:
        return len(self.points)
