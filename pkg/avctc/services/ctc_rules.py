"""CTC 规则查询

QP 列表、帧数和 AS 分辨率阶梯的查询接口，数据来自 config.ctc_tables。
"""

from collections.abc import Mapping, Sequence

from avctc.config.ctc_tables import AS_LADDERS, CTC_CONFIG_BY_ID
from avctc.exceptions import ConfigurationError
from avctc.models.rd import QpSet
from avctc.models.sequence import ECF_CLASS_PREFIX, STILL_IMAGE_CLASS, CodingConfig

Resolution = tuple[int, int]


def qp_set_for(config: CodingConfig) -> QpSet:
    """返回配置对应的 6 个 QP（AS 与 RA 相同）"""
    return CTC_CONFIG_BY_ID[config].qps


def frame_count_for(config: CodingConfig, class_label: str, is_ecf: bool | None = None) -> int:
    """返回配置 + 类别对应的编码帧数

    Args:
        config: 编码配置
        class_label: CTC 类别
        is_ecf: 是否 ECF 类别；None 时按类别名前缀推导

    Raises:
        ConfigurationError: 组合未在 CTC 中定义
    """
    label = class_label.upper()
    if is_ecf is None:
        is_ecf = label.startswith(ECF_CLASS_PREFIX)
    still = label == STILL_IMAGE_CLASS

    if config is CodingConfig.STILL_IMAGE:
        return 1

    entry = CTC_CONFIG_BY_ID[config]
    if still:
        # F 类只在静态图像和 AI 中出现，每张图 1 帧
        if config is CodingConfig.ALL_INTRA:
            return 1
        raise ConfigurationError(f"类别 {class_label} 不支持配置 {config.value}")
    if is_ecf:
        if entry.ecf_frames is None:
            raise ConfigurationError(f"ECF 类别不支持配置 {config.value}")
        return entry.ecf_frames
    return entry.frames


def as_ladder_for(
    source_width: int,
    source_height: int,
    overrides: Mapping[Resolution, Sequence[Resolution]] | None = None,
) -> list[Resolution]:
    """返回 AS 下采样分辨率阶梯（不含源分辨率）

    manifest 提供的阶梯优先于内置表。

    Raises:
        ConfigurationError: 源分辨率既不在内置表也不在 overrides 中
    """
    key = (source_width, source_height)
    if overrides and key in overrides:
        return [tuple(r) for r in overrides[key]]  # type: ignore[misc]
    if key in AS_LADDERS:
        return list(AS_LADDERS[key])
    raise ConfigurationError(
        f"没有 {source_width}x{source_height} 的 AS 分辨率阶梯，请在 manifest 的 ladders 中配置"
    )
