"""外部指标日志模型

MetricLog 对应一次（序列, QP）编码的指标输出：逐帧记录加池化值。
"""

from typing import NamedTuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from avctc.models.rd import MetricId
from avctc.models.sequence import CodingConfig

Resolution = tuple[int, int]


class CurveKey(NamedTuple):
    """一组 RD 曲线的身份：序列 + 配置 + 分辨率"""

    sequence: str
    config: CodingConfig | None
    resolution: Resolution | None


class MetricLog(BaseModel):
    """一次编码的指标日志

    frames 的下标即帧号（从 0 连续）；pooled 覆盖所有出现在逐帧记录中的指标。
    CSV 方言只有池化值，frames 为空，且自带码率。
    """

    model_config = ConfigDict(frozen=True)

    sequence: str
    qp: int | None = None
    config: CodingConfig | None = None
    resolution: Resolution | None = None
    bitrate_kbps: float | None = Field(default=None, gt=0)
    frames: tuple[dict[MetricId, float], ...] = ()
    pooled: dict[MetricId, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_pooled(self) -> "MetricLog":
        framed = {m for record in self.frames for m in record}
        missing = framed - set(self.pooled)
        if missing:
            raise ValueError(f"缺少池化值: {sorted(m.value for m in missing)}")
        return self

    @property
    def key(self) -> CurveKey:
        return CurveKey(self.sequence, self.config, self.resolution)

    @property
    def metrics(self) -> list[MetricId]:
        return sorted(self.pooled, key=lambda m: list(MetricId).index(m))
