"""PCHIP 插值单元测试

验证：
- 过节点、单调保形
- 解析积分（线性 / 三次多项式数据）
- 禁止外推
- 对数码率加密插值
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from avctc.exceptions import ArgumentError, DomainError, FitError
from avctc.models.rd import MetricId, RDPoint
from avctc.services.interp import (
    PchipSpline,
    densify_log_rate,
    pchip_eval,
    pchip_fit,
    pchip_integral,
)


def _sample(spline: PchipSpline, xs: np.ndarray) -> np.ndarray:
    return np.array([pchip_eval(spline, float(x)) for x in xs])


# ============================================================
# 1. 拟合与求值
# ============================================================
class TestPchipFit:
    """pchip_fit / pchip_eval"""

    def test_passes_through_knots(self) -> None:
        points = [(30.0, 5.0), (33.0, 5.8), (36.0, 6.4), (40.0, 7.9)]
        spline = pchip_fit(points)
        for x, y in points:
            assert pchip_eval(spline, x) == pytest.approx(y)

    def test_linear_data_reproduced(self) -> None:
        """线性数据的 PCHIP 就是这条直线"""
        spline = pchip_fit([(0.0, 1.0), (1.0, 3.0), (2.0, 5.0), (3.0, 7.0)])
        assert pchip_eval(spline, 1.5) == pytest.approx(4.0)
        assert all(d == pytest.approx(2.0) for d in spline.derivatives)

    def test_flat_segment_has_zero_slope(self) -> None:
        """割线为 0 的相邻节点不会被冲过"""
        spline = pchip_fit([(0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 2.0)])
        xs = np.linspace(1.0, 2.0, 21)
        assert np.allclose(_sample(spline, xs), 1.0)

    def test_too_few_points(self) -> None:
        with pytest.raises(FitError):
            pchip_fit([(1.0, 1.0)])

    def test_non_increasing_x(self) -> None:
        with pytest.raises(FitError):
            pchip_fit([(1.0, 1.0), (1.0, 2.0), (2.0, 3.0)])

    def test_non_finite_input(self) -> None:
        with pytest.raises(FitError):
            pchip_fit([(1.0, 1.0), (2.0, math.nan)])

    def test_no_extrapolation(self) -> None:
        spline = pchip_fit([(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)])
        with pytest.raises(DomainError):
            pchip_eval(spline, 2.0001)
        with pytest.raises(DomainError):
            pchip_eval(spline, -0.1)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=0.01, max_value=10.0, allow_nan=False),
            min_size=2,
            max_size=8,
        ),
        st.lists(
            st.floats(min_value=0.0, max_value=10.0, allow_nan=False),
            min_size=8,
            max_size=8,
        ),
    )
    def test_monotone_data_gives_monotone_spline(self, dx: list[float], dy: list[float]) -> None:
        """单调数据的插值在节点之间也单调（不过冲）"""
        xs = np.cumsum([0.0, *dx])
        ys = np.cumsum([0.0, *dy[: len(dx)]])
        spline = pchip_fit(list(zip(xs.tolist(), ys.tolist(), strict=True)))
        values = _sample(spline, np.linspace(xs[0], xs[-1], 200))
        assert np.all(np.diff(values) >= -1e-9 * max(1.0, ys[-1]))
        assert values.min() >= ys[0] - 1e-9
        assert values.max() <= ys[-1] + 1e-9


# ============================================================
# 2. 积分
# ============================================================
class TestPchipIntegral:
    """解析积分"""

    def test_linear_integral(self) -> None:
        spline = pchip_fit([(0.0, 0.0), (1.0, 2.0), (2.0, 4.0)])
        # ∫0..2 2x dx = 4
        assert pchip_integral(spline, 0.0, 2.0) == pytest.approx(4.0)

    def test_partial_interval(self) -> None:
        spline = pchip_fit([(0.0, 1.0), (4.0, 1.0)])
        assert pchip_integral(spline, 1.0, 3.0) == pytest.approx(2.0)

    def test_matches_numeric_quadrature(self) -> None:
        points = [(30.0, 8.7), (33.0, 7.9), (36.0, 7.3), (39.0, 6.6), (42.0, 6.0)]
        points = sorted((x, -y) for x, y in points)
        spline = pchip_fit(points)
        xs = np.linspace(31.0, 41.0, 20001)
        numeric = np.trapezoid(_sample(spline, xs), xs)
        assert pchip_integral(spline, 31.0, 41.0) == pytest.approx(numeric, rel=1e-6)

    def test_matches_adaptive_quadrature(self) -> None:
        """(0,0),(1,2),(3,3) 在 [0,3] 上与自适应数值积分一致"""
        spline = pchip_fit([(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)])
        numeric, _ = quad(lambda x: pchip_eval(spline, x), 0.0, 3.0, points=[1.0], epsabs=1e-13, epsrel=1e-13)
        assert pchip_integral(spline, 0.0, 3.0) == pytest.approx(numeric, abs=1e-9)

    def test_short_interval_limit(self) -> None:
        spline = pchip_fit([(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)])
        a, eps = 0.7, 1e-8
        assert pchip_integral(spline, a, a + eps) == pytest.approx(pchip_eval(spline, a) * eps, rel=1e-6)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(min_value=0.1, max_value=5.0), min_size=2, max_size=6),
        st.floats(min_value=0.01, max_value=0.99),
        st.floats(min_value=0.01, max_value=0.99),
    )
    def test_additive_over_split(self, dy: list[float], s: float, t: float) -> None:
        """∫[a,b] + ∫[b,c] = ∫[a,c]"""
        xs = [30.0 + 2.0 * i for i in range(len(dy) + 1)]
        ys = np.cumsum([0.0, *dy]).tolist()
        spline = pchip_fit(list(zip(xs, ys, strict=True)))
        a = xs[0] + (xs[-1] - xs[0]) * min(s, t) / 2
        c = xs[-1] - (xs[-1] - xs[0]) * (1 - max(s, t)) / 2
        b = (a + c) / 2
        whole = pchip_integral(spline, a, c)
        assert pchip_integral(spline, a, b) + pchip_integral(spline, b, c) == pytest.approx(whole, rel=1e-12, abs=1e-12)

    def test_reversed_interval(self) -> None:
        spline = pchip_fit([(0.0, 0.0), (1.0, 1.0)])
        with pytest.raises(ArgumentError):
            pchip_integral(spline, 1.0, 0.5)

    def test_out_of_domain(self) -> None:
        spline = pchip_fit([(0.0, 0.0), (1.0, 1.0)])
        with pytest.raises(DomainError):
            pchip_integral(spline, 0.0, 1.5)


# ============================================================
# 3. 对数码率加密插值
# ============================================================
class TestDensifyLogRate:
    """densify_log_rate"""

    def _point(self, rate: float, quality: float, qp: int) -> RDPoint:
        return RDPoint(qp=qp, bitrate_kbps=rate, quality=quality, metric_id=MetricId.PSNR_Y)

    def test_log_uniform_rates(self) -> None:
        """100 → 1600 kbps 插入 3 个点：200, 400, 800"""
        points = densify_log_rate(self._point(100.0, 30.0, 200), self._point(1600.0, 38.0, 100), 3)
        assert [p.bitrate_kbps for p in points] == pytest.approx([200.0, 400.0, 800.0])
        assert [p.quality for p in points] == pytest.approx([32.0, 34.0, 36.0])

    def test_points_marked_interpolated(self) -> None:
        points = densify_log_rate(self._point(100.0, 30.0, 200), self._point(200.0, 31.0, 180), 7)
        assert len(points) == 7
        assert all(p.interpolated and p.qp is None for p in points)
        assert all(p.metric_id is MetricId.PSNR_Y for p in points)

    def test_zero_intermediate(self) -> None:
        assert densify_log_rate(self._point(100.0, 30.0, 200), self._point(200.0, 31.0, 180), 0) == []

    def test_rejects_inverted_rates(self) -> None:
        with pytest.raises(ArgumentError):
            densify_log_rate(self._point(200.0, 31.0, 180), self._point(100.0, 30.0, 200), 3)

    def test_rejects_negative_count(self) -> None:
        with pytest.raises(ArgumentError):
            densify_log_rate(self._point(100.0, 30.0, 200), self._point(200.0, 31.0, 180), -1)
