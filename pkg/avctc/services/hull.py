"""AS 凸包服务

多分辨率 RD 点的 Pareto 前沿：
- 每个分辨率先剔除饱和点，再在相邻 QP 之间按对数码率插入中间点
- 所有分辨率的点取并集，先取非支配前沿（逐对支配过滤）
- 在前沿上求 (log 码率, 质量) 平面的上凸包，码率和质量都严格递增
"""

import csv
import io
import logging
import math
from collections.abc import Iterable, Mapping, Sequence

from avctc.config.settings import settings
from avctc.exceptions import ArgumentError, OverlapError
from avctc.models.hull import ConvexHull, HullPoint
from avctc.models.metric_log import CurveKey
from avctc.models.rd import MetricId, QpSet, RDCurve, RDPoint
from avctc.models.report import BdRateResult, QualityRange
from avctc.models.sequence import CodingConfig
from avctc.services.bdrate import bd_rate_curves, exclude_saturated
from avctc.services.ctc_rules import qp_set_for
from avctc.services.interp import densify_log_rate

logger = logging.getLogger(__name__)

# 共线判定的相对容差
_COLLINEAR_EPS = 1e-12

HULL_CSV_COLUMNS = ("sequence", "metric", "resolution", "qp_or_interp", "bitrate_kbps", "quality", "on_hull")


def _resolution_of(curve: RDCurve) -> tuple[int, int]:
    if curve.resolution is not None:
        return curve.resolution
    if curve.info is not None:
        return curve.info.resolution
    raise ArgumentError(f"曲线 {curve.sequence}/{curve.metric_id.value} 没有分辨率信息")


def densify_curve(curve: RDCurve, n_intermediate: int | None = None) -> list[HullPoint]:
    """实测点之间插入对数均匀的中间点

    6 个实测点、n=7 时输出 6 + 5·7 = 41 个点。
    """
    if n_intermediate is None:
        n_intermediate = settings.DENSIFY_INTERMEDIATE_POINTS
    if len(curve) < 2:
        raise ArgumentError(f"加密插值至少需要 2 个点: {curve.sequence}")

    resolution = _resolution_of(curve)

    def to_hull(point: RDPoint) -> HullPoint:
        return HullPoint(
            bitrate_kbps=point.bitrate_kbps,
            quality=point.quality,
            source_resolution=resolution,
            qp=point.qp,
            interpolated=point.interpolated,
        )

    result: list[HullPoint] = []
    for p_low, p_high in zip(curve.points, curve.points[1:], strict=False):
        result.append(to_hull(p_low))
        result.extend(to_hull(p) for p in densify_log_rate(p_low, p_high, n_intermediate))
    result.append(to_hull(curve.points[-1]))
    return result


def densify_union(curves: Sequence[RDCurve], n_intermediate: int | None = None) -> list[HullPoint]:
    """各分辨率剔除饱和点并加密后的并集"""
    if not curves:
        raise ArgumentError("凸包至少需要一条曲线")
    metrics = {c.metric_id for c in curves}
    if len(metrics) != 1:
        raise ArgumentError(f"凸包输入的指标不一致: {sorted(m.value for m in metrics)}")

    union: list[HullPoint] = []
    for curve in curves:
        union.extend(densify_curve(exclude_saturated(curve), n_intermediate))
    return union


def _cross(o: HullPoint, a: HullPoint, b: HullPoint) -> tuple[float, float]:
    """返回 (叉积, 量级)，用于带相对容差的转向判断"""
    ax, ay = a.log_rate - o.log_rate, a.quality - o.quality
    bx, by = b.log_rate - o.log_rate, b.quality - o.quality
    return ax * by - ay * bx, abs(ax * by) + abs(ay * bx)


def _rank(p: HullPoint) -> tuple[float, bool, tuple[int, int], int]:
    return (p.quality, not p.interpolated, p.source_resolution, -1 if p.qp is None else p.qp)


def pareto_front(points: Iterable[HullPoint]) -> list[HullPoint]:
    """非支配点（阶梯形前沿），按码率升序，码率和质量都严格递增

    同一码率只保留质量最高的点（同质量时优先实测点）；按码率升序扫描，
    质量不超过已保留最大值的点被丢弃。每个被丢弃的点都存在一个前沿点，
    码率不高于它且质量不低于它。结果与输入顺序无关。
    """
    best: dict[float, HullPoint] = {}
    for p in points:
        current = best.get(p.bitrate_kbps)
        if current is None or _rank(p) > _rank(current):
            best[p.bitrate_kbps] = p

    front: list[HullPoint] = []
    for p in (best[r] for r in sorted(best)):
        if not front or p.quality > front[-1].quality:
            front.append(p)
    return front


def upper_hull(points: Iterable[HullPoint], metric_id: MetricId, sequence: str = "") -> ConvexHull:
    """点集的 Pareto 凸包

    两步：先取非支配前沿（pareto_front），再在前沿上用单调链求上凸包并去掉共线点。
    凸包顶点都是前沿点；前沿上不是顶点的点位于相邻两个顶点的弦下方，
    由前沿包络（ConvexHull.dominates）覆盖，不一定被某个顶点逐对支配。

    Raises:
        ArgumentError: 点集为空
    """
    front = pareto_front(points)
    if not front:
        raise ArgumentError("凸包输入点集为空")

    chain: list[HullPoint] = []
    for p in front:
        while len(chain) >= 2:
            cross, scale = _cross(chain[-2], chain[-1], p)
            if cross < -_COLLINEAR_EPS * scale:
                break
            chain.pop()
        chain.append(p)
    return ConvexHull(metric_id=metric_id, points=tuple(chain), sequence=sequence)


def build_hull(curves: Sequence[RDCurve], n_intermediate: int | None = None) -> ConvexHull:
    """多分辨率 RD 曲线的凸包"""
    union = densify_union(curves, n_intermediate)
    hull = upper_hull(union, curves[0].metric_id, curves[0].sequence)
    logger.debug(
        "📐 凸包 %s/%s: %d 个分辨率, %d 个点 → %d 个顶点",
        hull.sequence,
        hull.metric_id.value,
        len(curves),
        len(union),
        len(hull.points),
    )
    return hull


def group_resolutions(
    curve_sets: Mapping[CurveKey, Mapping[MetricId, RDCurve]],
    metric_id: MetricId,
    config: CodingConfig = CodingConfig.ADAPTIVE_STREAMING,
) -> dict[str, list[RDCurve]]:
    """按序列收集某指标在各分辨率上的曲线（AS 凸包的输入）"""
    grouped: dict[str, list[RDCurve]] = {}
    for key in sorted(curve_sets, key=lambda k: (k.sequence, k.resolution or (0, 0))):
        if key.config not in (config, None) or metric_id not in curve_sets[key]:
            continue
        grouped.setdefault(key.sequence, []).append(curve_sets[key][metric_id])
    return grouped


# ========== 凸包 BD-rate ==========


def hull_to_curve(hull: ConvexHull) -> RDCurve:
    return RDCurve.from_points(
        hull.sequence or "hull",
        CodingConfig.ADAPTIVE_STREAMING,
        hull.metric_id,
        (
            RDPoint(
                qp=p.qp,
                bitrate_kbps=p.bitrate_kbps,
                quality=p.quality,
                metric_id=hull.metric_id,
                interpolated=p.interpolated,
            )
            for p in hull.points
        ),
    )


def hull_quality_window(
    anchor_hull: ConvexHull, quality_range: QualityRange, qps: QpSet | None = None
) -> tuple[float, float] | None:
    """凸包上的质量窗口：锚点凸包中 QP 落在窗口内的实测点的质量跨度

    多分辨率凸包丢失了 QP 与质量的对应关系，所以用锚点实测点的质量代替。
    """
    if quality_range is QualityRange.FULL:
        return None
    if qps is None:
        qps = qp_set_for(CodingConfig.ADAPTIVE_STREAMING)

    start, stop = quality_range.window
    window_qps = set(sorted(qps.as_list(), reverse=True)[start:stop])
    qualities = [p.quality for p in anchor_hull.measured_points() if p.qp in window_qps]
    if len(qualities) < 2 or min(qualities) == max(qualities):
        raise OverlapError(
            f"锚点凸包在 {quality_range.value} 区间内的实测点不足，无法确定质量窗口"
        )
    return (min(qualities), max(qualities))


def hull_bd_rate(
    anchor_hull: ConvexHull,
    test_hull: ConvexHull,
    quality_range: QualityRange = QualityRange.FULL,
    *,
    qps: QpSet | None = None,
    log_base: float = math.e,
) -> BdRateResult:
    """两条凸包之间的 BD-rate"""
    if anchor_hull.metric_id != test_hull.metric_id:
        raise ArgumentError(
            f"两个凸包的指标不同: {anchor_hull.metric_id.value} vs {test_hull.metric_id.value}"
        )
    window = hull_quality_window(anchor_hull, quality_range, qps)
    return bd_rate_curves(
        hull_to_curve(anchor_hull),
        hull_to_curve(test_hull),
        quality_window=window,
        log_base=log_base,
    )


# ========== 导出 ==========


def emit_hull_csv(union: Sequence[HullPoint], hull: ConvexHull, header: bool = True) -> str:
    """导出并集中的所有点，标记是否在凸包上（绘图数据）

    多个序列拼接输出时，除第一段外传 header=False。
    """
    on_hull = {(p.bitrate_kbps, p.quality, p.source_resolution) for p in hull.points}
    decimals = settings.BITRATE_DECIMALS

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if header:
        writer.writerow(HULL_CSV_COLUMNS)
    for p in sorted(union, key=lambda p: (p.bitrate_kbps, p.quality)):
        writer.writerow(
            [
                hull.sequence,
                hull.metric_id.value,
                f"{p.source_resolution[0]}x{p.source_resolution[1]}",
                "interp" if p.interpolated or p.qp is None else p.qp,
                f"{p.bitrate_kbps:.{decimals}f}",
                f"{p.quality:.6f}",
                1 if (p.bitrate_kbps, p.quality, p.source_resolution) in on_hull else 0,
            ]
        )
    return buffer.getvalue()
