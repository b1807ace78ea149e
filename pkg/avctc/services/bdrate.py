"""BD-rate 计算服务

流程（顺序固定）：
1. 按 QualityRange 选取 QP 窗口
2. 饱和指标剔除平台区的点
3. 对每条曲线拟合 log(码率) = PCHIP(质量)
4. 在质量重叠区间上解析积分，平均 log 码率差取指数后减 1

结果为比例值：-0.30 表示同等质量下节省 30% 码率。
"""

import logging
import math
from collections.abc import Sequence

from avctc.config.settings import settings
from avctc.exceptions import (
    ArgumentError,
    ExclusionError,
    NonMonotonicCurveError,
    OverlapError,
)
from avctc.models.rd import RDCurve, RDPoint
from avctc.models.report import BdRateResult, PlaneWeights, QualityRange
from avctc.services.interp import pchip_fit, pchip_integral

logger = logging.getLogger(__name__)

# 部分质量区间要求曲线恰好有 6 个实测点
CTC_POINT_COUNT = 6


# ========== 点选择 ==========


def _scan_saturated(curve: RDCurve) -> tuple[list[RDPoint], list[RDPoint]]:
    """按码率升序扫描，质量不超过已保留点最大值的点被剔除"""
    kept: list[RDPoint] = []
    dropped: list[RDPoint] = []
    best = -math.inf
    for point in curve.points:
        if point.quality > best:
            kept.append(point)
            best = point.quality
        else:
            dropped.append(point)
    return kept, dropped


def exclude_saturated(curve: RDCurve) -> RDCurve:
    """剔除饱和指标平台区的点

    非饱和指标（PSNR 系）原样返回。

    Raises:
        ExclusionError: 剔除后不足 2 个点
    """
    if not curve.metric_id.saturating:
        return curve

    kept, dropped = _scan_saturated(curve)
    if len(kept) < 2:
        raise ExclusionError(
            f"{curve.sequence}/{curve.metric_id.value}: 剔除饱和点后只剩 {len(kept)} 个点"
        )
    if dropped:
        logger.info(
            "🧹 %s/%s 剔除饱和点: %s",
            curve.sequence,
            curve.metric_id.value,
            [p.qp for p in dropped],
        )
        return curve.with_points(kept)
    return curve


def select_range(curve: RDCurve, quality_range: QualityRange) -> RDCurve:
    """按 QP 窗口选取子曲线

    QP 按数值降序编号（QP1 为最大 QP、质量最低），
    LOW = QP1..QP4，MID = QP2..QP5，HIGH = QP3..QP6。

    Raises:
        ArgumentError: 部分区间但曲线不是 6 个带 QP 的实测点
    """
    if quality_range is QualityRange.FULL:
        return curve
    if len(curve) != CTC_POINT_COUNT or any(p.qp is None for p in curve.points):
        raise ArgumentError(
            f"{curve.sequence}/{curve.metric_id.value}: {quality_range.value} 区间需要 "
            f"{CTC_POINT_COUNT} 个带 QP 的实测点，实际 {len(curve)} 个"
        )

    start, stop = quality_range.window
    by_qp = sorted(curve.points, key=lambda p: p.qp or 0, reverse=True)
    return curve.with_points(by_qp[start:stop])


def _require_monotone(curve: RDCurve, role: str) -> None:
    for lower, upper in zip(curve.points, curve.points[1:], strict=False):
        if not upper.quality > lower.quality:
            raise NonMonotonicCurveError(
                f"{role} 曲线 {curve.sequence}/{curve.metric_id.value} 质量非单调: "
                f"{lower.bitrate_kbps} kbps→{lower.quality}, {upper.bitrate_kbps} kbps→{upper.quality}"
            )


# ========== BD-rate ==========


def _integrate_log_rate(curve: RDCurve, lo: float, hi: float, log_base: float) -> float:
    log_scale = math.log(log_base)
    knots = [(p.quality, math.log(p.bitrate_kbps) / log_scale) for p in curve.points]
    return pchip_integral(pchip_fit(knots), lo, hi)


def bd_rate_curves(
    anchor: RDCurve,
    test: RDCurve,
    *,
    quality_window: tuple[float, float] | None = None,
    excluded_points: tuple[tuple[str, int | None], ...] = (),
    log_base: float = math.e,
) -> BdRateResult:
    """对已完成点选择的两条曲线计算 BD-rate

    Args:
        anchor: 锚点曲线（质量严格递增）
        test: 测试曲线
        quality_window: 额外限制积分区间（凸包的 QP 窗口）
        excluded_points: 记录进结果的剔除点
        log_base: 内部对数底，结果与之无关

    Raises:
        NonMonotonicCurveError: 曲线质量非严格递增
        OverlapError: 质量区间不重叠或重叠宽度为 0
    """
    if log_base <= 0 or log_base == 1:
        raise ArgumentError(f"对数底无效: {log_base}")
    if anchor.metric_id != test.metric_id:
        raise ArgumentError(
            f"两条曲线的指标不同: {anchor.metric_id.value} vs {test.metric_id.value}"
        )
    for role, curve in (("anchor", anchor), ("test", test)):
        if len(curve) < 2:
            raise ExclusionError(f"{role} 曲线 {curve.sequence} 可用点不足 2 个")
        _require_monotone(curve, role)

    lo = max(min(anchor.qualities), min(test.qualities))
    hi = min(max(anchor.qualities), max(test.qualities))
    if quality_window is not None:
        lo = max(lo, quality_window[0])
        hi = min(hi, quality_window[1])
    if not lo < hi:
        raise OverlapError(
            f"{anchor.sequence}/{anchor.metric_id.value}: 质量区间不重叠 [{lo}, {hi}]"
        )

    int_anchor = _integrate_log_rate(anchor, lo, hi, log_base)
    int_test = _integrate_log_rate(test, lo, hi, log_base)
    value = log_base ** ((int_test - int_anchor) / (hi - lo)) - 1.0

    return BdRateResult(
        value=value,
        overlap_quality=(lo, hi),
        points_used_anchor=len(anchor),
        points_used_test=len(test),
        excluded_points=excluded_points,
        metric_id=anchor.metric_id,
    )


def bd_rate(
    anchor: RDCurve,
    test: RDCurve,
    quality_range: QualityRange = QualityRange.FULL,
    *,
    log_base: float = math.e,
) -> BdRateResult:
    """两条 RD 曲线之间的 BD-rate

    先选区间，再剔除饱和点，最后求重叠区间。
    """
    if anchor.metric_id != test.metric_id:
        raise ArgumentError(
            f"两条曲线的指标不同: {anchor.metric_id.value} vs {test.metric_id.value}"
        )

    selected = {"anchor": select_range(anchor, quality_range), "test": select_range(test, quality_range)}
    usable: dict[str, RDCurve] = {}
    excluded: list[tuple[str, int | None]] = []
    for role, curve in selected.items():
        if curve.metric_id.saturating:
            _, dropped = _scan_saturated(curve)
            excluded.extend((role, p.qp) for p in dropped)
        usable[role] = exclude_saturated(curve)

    return bd_rate_curves(
        usable["anchor"],
        usable["test"],
        excluded_points=tuple(excluded),
        log_base=log_base,
    )


def bd_rate_all_ranges(
    anchor: RDCurve, test: RDCurve, ranges: Sequence[QualityRange] = tuple(QualityRange)
) -> dict[QualityRange, BdRateResult]:
    """计算给定的各质量区间

    部分区间只对两条 6 点曲线有定义，点数不足时结果里不含这些区间（FULL 总会计算）。
    """
    partial_ok = len(anchor) == len(test) == CTC_POINT_COUNT
    return {r: bd_rate(anchor, test, r) for r in ranges if r is QualityRange.FULL or partial_ok}


def bd_rate_weighted(y: float, cb: float, cr: float, w: PlaneWeights | None = None) -> float:
    """平面加权 BD-rate：A·Y + B·Cb + B·Cr"""
    if not all(math.isfinite(v) for v in (y, cb, cr)):
        raise ArgumentError(f"加权 BD-rate 输入必须为有限值: {(y, cb, cr)}")
    if w is None:
        w = PlaneWeights(a=settings.PLANE_WEIGHT_A, b=settings.PLANE_WEIGHT_B)
    return w.a * y + w.b * cb + w.b * cr
