"""CTC 常量表

集中管理 CTC 规定的 QP 列表、帧数规则、AS 分辨率阶梯和报表行结构。
修改 CTC 版本时只需同步更新本文件。
"""

from pydantic import BaseModel, ConfigDict

from avctc.models.rd import QpSet
from avctc.models.report import GroupSpec, OverallSpec, ReportGrouping
from avctc.models.sequence import CodingConfig


class CtcConfigEntry(BaseModel):
    """一个编码配置的 CTC 规则"""

    model_config = ConfigDict(frozen=True)

    config: CodingConfig
    qps: QpSet
    frames: int  # 常规类别的帧数
    ecf_frames: int | None = None  # ECF 类别帧数，None 表示该配置不支持 ECF
    description: str = ""


# CTC 配置列表（集中配置）
CTC_CONFIGS: list[CtcConfigEntry] = [
    CtcConfigEntry(
        config=CodingConfig.STILL_IMAGE,
        qps=QpSet(qps=(60, 85, 110, 135, 160, 185)),
        frames=1,
        description="Still Image",
    ),
    CtcConfigEntry(
        config=CodingConfig.ALL_INTRA,
        qps=QpSet(qps=(85, 110, 135, 160, 185, 210)),
        frames=15,
        ecf_frames=5,
        description="All Intra",
    ),
    CtcConfigEntry(
        config=CodingConfig.RANDOM_ACCESS,
        qps=QpSet(qps=(110, 135, 160, 185, 210, 235)),
        frames=130,  # 两个封闭 GOP
        ecf_frames=66,
        description="Random Access",
    ),
    CtcConfigEntry(
        config=CodingConfig.LOW_DELAY,
        qps=QpSet(qps=(110, 135, 160, 185, 210, 235)),
        frames=130,
        ecf_frames=33,
        description="Low Delay",
    ),
    CtcConfigEntry(
        # AS 每个分辨率都按 RA 编码
        config=CodingConfig.ADAPTIVE_STREAMING,
        qps=QpSet(qps=(110, 135, 160, 185, 210, 235)),
        frames=130,
        description="Adaptive Streaming",
    ),
]

CTC_CONFIG_BY_ID: dict[CodingConfig, CtcConfigEntry] = {e.config: e for e in CTC_CONFIGS}

# AS 分辨率阶梯（不含源分辨率本身），其他源分辨率由 manifest 提供
AS_LADDERS: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {
    (3840, 2160): ((2560, 1440), (1920, 1080), (1280, 720), (960, 540), (640, 360)),
}


# ==================== 报表行结构 ====================

_VIDEO_GROUPS: tuple[GroupSpec, ...] = (
    GroupSpec(label="Class A+B1", classes=("A1", "A2", "A3", "A4", "A5", "B1")),
    GroupSpec(label="Class B2 (SCC)", classes=("B2",)),
    GroupSpec(label="Class G (HDR)", classes=("G",)),
    GroupSpec(label="Class E (UGC)", classes=("E",)),
    GroupSpec(label="ECF YCgCo", classes=("ECF-YCGCO",)),
    GroupSpec(label="ECF SCC", classes=("ECF-SCC",)),
    GroupSpec(label="ECF 4:4:4", classes=("ECF-444",)),
    GroupSpec(label="ECF 4:2:2", classes=("ECF-422",)),
)

_VIDEO_OVERALL: tuple[OverallSpec, ...] = (
    OverallSpec(label="ECF Overall", groups=("ECF YCgCo", "ECF SCC", "ECF 4:4:4", "ECF 4:2:2")),
    OverallSpec(
        label="4:2:0 Overall",
        groups=("Class A+B1", "Class B2 (SCC)", "Class G (HDR)", "Class E (UGC)"),
    ),
)

DEFAULT_GROUPINGS: dict[CodingConfig, ReportGrouping] = {
    CodingConfig.ALL_INTRA: ReportGrouping(
        config=CodingConfig.ALL_INTRA, groups=_VIDEO_GROUPS, overall=_VIDEO_OVERALL
    ),
    CodingConfig.RANDOM_ACCESS: ReportGrouping(
        config=CodingConfig.RANDOM_ACCESS, groups=_VIDEO_GROUPS, overall=_VIDEO_OVERALL
    ),
    CodingConfig.LOW_DELAY: ReportGrouping(
        config=CodingConfig.LOW_DELAY, groups=_VIDEO_GROUPS, overall=_VIDEO_OVERALL
    ),
    # AS 只报 4:2:0 Overall，成员是所有 4:2:0 类别
    CodingConfig.ADAPTIVE_STREAMING: ReportGrouping(
        config=CodingConfig.ADAPTIVE_STREAMING,
        groups=(
            GroupSpec(
                label="4:2:0 Overall",
                classes=("A1", "A2", "A3", "A4", "A5", "B1", "B2", "G", "E"),
            ),
        ),
    ),
    CodingConfig.STILL_IMAGE: ReportGrouping(
        config=CodingConfig.STILL_IMAGE,
        groups=(GroupSpec(label="Class F", classes=("F",)),),
    ),
}

# 只有一行、且该行本身就是汇总结果的配置（Markdown 中加粗）
SUMMARY_ONLY_CONFIGS = frozenset({CodingConfig.ADAPTIVE_STREAMING, CodingConfig.STILL_IMAGE})

# 报表中配置的展示顺序
CONFIG_ORDER: tuple[CodingConfig, ...] = (
    CodingConfig.ALL_INTRA,
    CodingConfig.RANDOM_ACCESS,
    CodingConfig.LOW_DELAY,
    CodingConfig.ADAPTIVE_STREAMING,
    CodingConfig.STILL_IMAGE,
)

CONFIG_TITLES: dict[CodingConfig, str] = {
    CodingConfig.ALL_INTRA: "All Intra",
    CodingConfig.RANDOM_ACCESS: "Random Access",
    CodingConfig.LOW_DELAY: "Low Delay",
    CodingConfig.ADAPTIVE_STREAMING: "Adaptive Streaming",
    CodingConfig.STILL_IMAGE: "Still Image",
}
