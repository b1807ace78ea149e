"""BD-rate 结果与报表模型"""

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from avctc.models.rd import MetricId
from avctc.models.sequence import CodingConfig


class QualityRange(str, Enum):
    """BD-rate 质量区间

    QP1 定义为数值最大的 QP（质量最低），所以 LOW = QP1..QP4
    选中码率最低的四个点。
    """

    FULL = "full"
    LOW = "low"
    MID = "mid"
    HIGH = "high"

    @property
    def window(self) -> tuple[int, int]:
        """在按 QP 降序排列的 6 个测量点上的 [start, stop) 下标窗口"""
        return _WINDOWS[self]


_WINDOWS = {
    QualityRange.FULL: (0, 6),
    QualityRange.LOW: (0, 4),
    QualityRange.MID: (1, 5),
    QualityRange.HIGH: (2, 6),
}


class PlaneWeights(BaseModel):
    """加权 BD-rate 的平面权重（A·Y + B·Cb + B·Cr）"""

    model_config = ConfigDict(frozen=True)

    a: float = 0.92
    b: float = 0.04

    @model_validator(mode="after")
    def validate_sum(self) -> "PlaneWeights":
        if not math.isclose(self.a + 2 * self.b, 1.0, abs_tol=1e-12):
            raise ValueError(f"平面权重不满足 a + 2b = 1: a={self.a}, b={self.b}")
        return self


class BdRateResult(BaseModel):
    """BD-rate 计算结果

    value 为码率变化比例：-0.30 表示节省 30% 码率。
    """

    model_config = ConfigDict(frozen=True)

    value: float
    overlap_quality: tuple[float, float]
    points_used_anchor: int = Field(..., ge=2)
    points_used_test: int = Field(..., ge=2)
    excluded_points: tuple[tuple[str, int | None], ...] = ()
    metric_id: MetricId | None = None

    @model_validator(mode="after")
    def validate_overlap(self) -> "BdRateResult":
        q_min, q_max = self.overlap_quality
        if not q_min < q_max:
            raise ValueError(f"重叠区间无效: {self.overlap_quality}")
        return self

    @property
    def percent(self) -> float:
        return self.value * 100.0


class GroupSpec(BaseModel):
    """报表中的一个类别行：标签 + 成员类别"""

    model_config = ConfigDict(frozen=True)

    label: str
    classes: tuple[str, ...]


class OverallSpec(BaseModel):
    """汇总行：对若干类别行的全部成员序列取均值"""

    model_config = ConfigDict(frozen=True)

    label: str
    groups: tuple[str, ...]


class ReportGrouping(BaseModel):
    """一个编码配置下的报表行结构（类别行在前，汇总行在后）"""

    model_config = ConfigDict(frozen=True)

    config: CodingConfig
    groups: tuple[GroupSpec, ...]
    overall: tuple[OverallSpec, ...] = ()

    def group_of(self, class_label: str) -> str | None:
        """返回类别所属的行标签，不属于任何行时返回 None"""
        for group in self.groups:
            if class_label in group.classes:
                return group.label
        return None

    def restricted_to(self, class_labels: set[str]) -> "ReportGrouping":
        """只保留有成员的行，空的汇总行一并去掉"""
        groups = tuple(g for g in self.groups if set(g.classes) & class_labels)
        kept = {g.label for g in groups}
        overall = tuple(
            OverallSpec(label=o.label, groups=tuple(g for g in o.groups if g in kept))
            for o in self.overall
            if set(o.groups) & kept
        )
        return ReportGrouping(config=self.config, groups=groups, overall=overall)


DEFAULT_REPORT_METRICS: tuple[MetricId, ...] = (
    MetricId.PSNR_Y,
    MetricId.PSNR_YUV,
    MetricId.SSIM,
    MetricId.MS_SSIM,
    MetricId.VMAF,
    MetricId.CIEDE2000,
)


class ReportRow(BaseModel):
    """报表中的一行，单元格为成员序列 BD-rate 的算术平均（比例值）"""

    model_config = ConfigDict(frozen=True)

    config: CodingConfig
    label: str
    is_overall: bool = False
    sequence_count: int = 0
    cells: dict[MetricId, float | None] = Field(default_factory=dict)


class ReportTable(BaseModel):
    """按类别汇总的 BD-rate 报表"""

    model_config = ConfigDict(frozen=True)

    metrics: tuple[MetricId, ...] = DEFAULT_REPORT_METRICS
    rows: tuple[ReportRow, ...] = ()

    def row(self, config: CodingConfig, label: str) -> ReportRow:
        for r in self.rows:
            if r.config == config and r.label == label:
                return r
        raise KeyError(f"{config.value}/{label}")


WEIGHTED_LABEL = "WEIGHTED"


class BdRateRow(BaseModel):
    """bdrate 子命令输出中的一行：一条曲线在各质量区间上的 BD-rate（比例值）

    metric 为 MetricId 的值，或平面加权行的 WEIGHTED。
    """

    model_config = ConfigDict(frozen=True)

    sequence: str
    config: CodingConfig
    resolution: tuple[int, int] | None = None
    metric: str
    values: dict[QualityRange, float | None] = Field(default_factory=dict)
