"""单调分段三次 Hermite 插值（PCHIP）

用于 BD-rate 拟合（log 码率关于质量的函数）以及凸包构造前的
对数域加密插值。

实现说明：
- 斜率计算使用 scipy.interpolate.PchipInterpolator：内部斜率为相邻割线的
  加权调和平均（割线异号时为 0），端点斜率为三点单侧公式并做保形截断
  （Fritsch–Carlson 限幅）
- 任何情况下都不外推，定义域外的求值和积分直接报错
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from avctc.exceptions import ArgumentError, DomainError, FitError
from avctc.models.rd import RDPoint


@dataclass(frozen=True)
class PchipSpline:
    """已拟合的单调 PCHIP 样条"""

    knots: tuple[tuple[float, float], ...]
    derivatives: tuple[float, ...]
    _poly: PchipInterpolator = field(repr=False, compare=False)

    @property
    def x_min(self) -> float:
        return self.knots[0][0]

    @property
    def x_max(self) -> float:
        return self.knots[-1][0]

    def contains(self, x: float) -> bool:
        return self.x_min <= x <= self.x_max


def pchip_fit(points: Sequence[tuple[float, float]]) -> PchipSpline:
    """拟合单调 PCHIP 样条

    Args:
        points: (x, y) 列表，x 严格递增，至少 2 个点

    Raises:
        FitError: 点数不足或 x 非严格递增
    """
    if len(points) < 2:
        raise FitError(f"PCHIP 至少需要 2 个点，实际 {len(points)} 个")

    xs = np.asarray([float(p[0]) for p in points], dtype=np.float64)
    ys = np.asarray([float(p[1]) for p in points], dtype=np.float64)
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise FitError("PCHIP 输入包含非有限值")
    if np.any(np.diff(xs) <= 0):
        raise FitError(f"PCHIP 的 x 必须严格递增: {xs.tolist()}")

    poly = PchipInterpolator(xs, ys, extrapolate=False)
    derivatives = poly.derivative()(xs)

    return PchipSpline(
        knots=tuple(zip(xs.tolist(), ys.tolist(), strict=True)),
        derivatives=tuple(float(d) for d in derivatives),
        _poly=poly,
    )


def _check_domain(spline: PchipSpline, x: float) -> None:
    if not spline.contains(x):
        raise DomainError(f"x={x} 超出样条定义域 [{spline.x_min}, {spline.x_max}]")


def pchip_eval(spline: PchipSpline, x: float) -> float:
    """在定义域内求值（不外推）"""
    _check_domain(spline, x)
    return float(spline._poly(x))


def pchip_integral(spline: PchipSpline, a: float, b: float) -> float:
    """分段三次多项式在 [a, b] 上的解析积分

    Raises:
        DomainError: 区间超出定义域
        ArgumentError: a >= b
    """
    if not a < b:
        raise ArgumentError(f"积分区间无效: [{a}, {b}]")
    _check_domain(spline, a)
    _check_domain(spline, b)
    return float(spline._poly.integrate(a, b))


def densify_log_rate(p_low: RDPoint, p_high: RDPoint, n_intermediate: int) -> list[RDPoint]:
    """在两个测量点之间按对数码率均匀插入中间点

    第 k 个点（k=1..n）的 log 码率为 log(r_low) + k·Δ/(n+1)，质量对 log 码率线性插值。
    返回的点不含两个端点，全部标记为 interpolated。

    Raises:
        ArgumentError: 码率相等或倒置，或 n_intermediate < 0
    """
    if n_intermediate < 0:
        raise ArgumentError(f"中间点数不能为负: {n_intermediate}")
    if not p_low.bitrate_kbps < p_high.bitrate_kbps:
        raise ArgumentError(
            f"加密插值要求 r_low < r_high: {p_low.bitrate_kbps} >= {p_high.bitrate_kbps}"
        )

    log_low = math.log(p_low.bitrate_kbps)
    log_high = math.log(p_high.bitrate_kbps)
    steps = n_intermediate + 1

    result: list[RDPoint] = []
    for k in range(1, n_intermediate + 1):
        t = k / steps
        result.append(
            RDPoint(
                qp=None,
                bitrate_kbps=math.exp(log_low + t * (log_high - log_low)),
                quality=p_low.quality + t * (p_high.quality - p_low.quality),
                metric_id=p_low.metric_id,
                interpolated=True,
            )
        )
    return result
