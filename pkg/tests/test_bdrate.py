"""BD-rate 单元测试

验证：
- 码率整体缩放 k 倍时 BD-rate 恰为 k-1（所有质量区间）
- QP 窗口选择
- 饱和点剔除
- 重叠区间、单调性等错误
- 平面加权
- 与网格数值积分对照
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avctc.exceptions import (
    ArgumentError,
    ExclusionError,
    NonMonotonicCurveError,
    OverlapError,
)
from avctc.models.rd import MetricId, RDCurve
from avctc.models.report import PlaneWeights, QualityRange
from avctc.services.bdrate import (
    bd_rate,
    bd_rate_all_ranges,
    bd_rate_curves,
    bd_rate_weighted,
    exclude_saturated,
    select_range,
)
from tests.conftest import ANCHOR_QUALITIES, ctc_curve, grid_bd_rate, make_curve

# 码率从高到低对应的 VMAF 值，最高码率处出现平台
VMAF_WITH_PLATEAU = (95.0, 95.0, 90.0, 80.0, 70.0, 60.0)

VMAF_RATES = [400.0, 700.0, 1200.0, 2100.0, 3700.0, 6500.0]
VMAF_TAIL = (60.0, 80.0, 95.0, 99.9, 99.9, 99.8)
VMAF_QPS = [235, 210, 185, 160, 135, 110]


def _scaled(curve: RDCurve, k: float) -> RDCurve:
    return curve.with_points(p.model_copy(update={"bitrate_kbps": p.bitrate_kbps * k}) for p in curve.points)


def _random_curve(rng: np.random.Generator, n: int = 6) -> RDCurve:
    rates = 200.0 * np.cumprod(rng.uniform(1.3, 2.2, n))
    qualities = 28.0 + np.cumsum(rng.uniform(0.8, 3.5, n))
    return make_curve(rates.tolist(), qualities.tolist())


@st.composite
def _monotone_curves(draw: st.DrawFn) -> RDCurve:
    n = draw(st.integers(min_value=2, max_value=6))
    steps = draw(st.lists(st.floats(min_value=1.1, max_value=3.0), min_size=n, max_size=n))
    gains = draw(st.lists(st.floats(min_value=0.2, max_value=4.0), min_size=n, max_size=n))
    rates = 100.0 * np.cumprod(steps)
    qualities = 30.0 + np.cumsum(gains)
    return make_curve(rates.tolist(), qualities.tolist())


# ============================================================
# 1. 缩放曲线的精确结果
# ============================================================
class TestScaledCurves:
    """test 码率 = k × anchor 码率 → BD-rate = k - 1"""

    @pytest.mark.parametrize("quality_range", list(QualityRange))
    @pytest.mark.parametrize("scale", [0.7, 0.95, 1.0, 1.2])
    def test_exact_value_per_range(self, scale: float, quality_range: QualityRange) -> None:
        result = bd_rate(ctc_curve(), ctc_curve(scale), quality_range)
        assert result.value == pytest.approx(scale - 1.0, abs=1e-12)

    def test_identical_curves_zero(self) -> None:
        result = bd_rate(ctc_curve(), ctc_curve())
        assert result.value == pytest.approx(0.0, abs=1e-15)
        assert result.percent == pytest.approx(0.0, abs=1e-13)

    def test_log_base_does_not_matter(self) -> None:
        anchor = ctc_curve()
        test = make_curve(
            [6000.0, 3500.0, 2000.0, 1150.0, 690.0, 390.0],
            (41.6, 40.1, 38.7, 36.6, 34.6, 32.1),
        )
        natural = bd_rate(anchor, test).value
        assert bd_rate(anchor, test, log_base=10.0).value == pytest.approx(natural, rel=1e-12)
        assert bd_rate(anchor, test, log_base=2.0).value == pytest.approx(natural, rel=1e-12)

    def test_overlap_and_counts_recorded(self) -> None:
        result = bd_rate(ctc_curve(), ctc_curve(0.8))
        assert result.overlap_quality == (min(ANCHOR_QUALITIES), max(ANCHOR_QUALITIES))
        assert result.points_used_anchor == 6
        assert result.points_used_test == 6
        assert result.metric_id is MetricId.PSNR_Y

    @settings(max_examples=40, deadline=None)
    @given(st.floats(min_value=0.3, max_value=3.0, allow_nan=False))
    def test_swapping_roles_inverts_ratio(self, scale: float) -> None:
        """交换 anchor / test：(1 + x)(1 + y) = 1"""
        forward = bd_rate(ctc_curve(), ctc_curve(scale)).value
        backward = bd_rate(ctc_curve(scale), ctc_curve()).value
        assert (1.0 + forward) * (1.0 + backward) == pytest.approx(1.0, rel=1e-9)

    def test_all_ranges_six_points(self) -> None:
        results = bd_rate_all_ranges(ctc_curve(), ctc_curve(0.9))
        assert set(results) == set(QualityRange)
        assert all(r.value == pytest.approx(-0.1, abs=1e-12) for r in results.values())

    def test_all_ranges_fewer_points_full_only(self) -> None:
        anchor = make_curve([100.0, 200.0, 400.0, 800.0], [30.0, 32.0, 34.0, 36.0])
        test = make_curve([90.0, 180.0, 360.0, 720.0], [30.0, 32.0, 34.0, 36.0])
        results = bd_rate_all_ranges(anchor, test)
        assert list(results) == [QualityRange.FULL]
        assert results[QualityRange.FULL].value == pytest.approx(-0.1, abs=1e-12)

    def test_all_ranges_subset(self) -> None:
        results = bd_rate_all_ranges(ctc_curve(), ctc_curve(0.9), (QualityRange.FULL, QualityRange.HIGH))
        assert list(results) == [QualityRange.FULL, QualityRange.HIGH]

    @settings(max_examples=50, deadline=None)
    @given(_monotone_curves(), _monotone_curves(), st.sampled_from([0.5, 0.8, 1.25]))
    def test_scale_law_random_curves(self, anchor: RDCurve, test: RDCurve, k: float) -> None:
        """码率乘 k：anchor 对 k·anchor 为 k-1，任意 test 的 (1+v) 乘 k"""
        scaled_anchor = _scaled(anchor, k)
        assert bd_rate(anchor, scaled_anchor).value == pytest.approx(k - 1.0, abs=1e-9)

        try:
            base = bd_rate(anchor, test).value
        except OverlapError:
            return
        assert bd_rate(anchor, _scaled(test, k)).value == pytest.approx((1.0 + base) * k - 1.0, abs=1e-9)


# ============================================================
# 2. QP 窗口
# ============================================================
class TestSelectRange:
    """QP1 为最大 QP；LOW = QP1..QP4"""

    def test_full_returns_curve(self) -> None:
        curve = ctc_curve()
        assert select_range(curve, QualityRange.FULL) is curve

    @pytest.mark.parametrize(
        ("quality_range", "qps"),
        [
            (QualityRange.LOW, {235, 210, 185, 160}),
            (QualityRange.MID, {210, 185, 160, 135}),
            (QualityRange.HIGH, {185, 160, 135, 110}),
        ],
    )
    def test_windows(self, quality_range: QualityRange, qps: set[int]) -> None:
        selected = select_range(ctc_curve(), quality_range)
        assert {p.qp for p in selected.points} == qps

    def test_low_range_has_lowest_rates(self) -> None:
        selected = select_range(ctc_curve(), QualityRange.LOW)
        assert selected.rates == [400.0, 700.0, 1200.0, 2100.0]

    def test_partial_range_needs_six_points(self) -> None:
        curve = make_curve([100.0, 200.0, 400.0, 800.0, 1600.0], [30.0, 32.0, 34.0, 36.0, 38.0],
                           qps=[235, 210, 185, 160, 135])
        with pytest.raises(ArgumentError):
            select_range(curve, QualityRange.MID)

    def test_partial_range_needs_qps(self) -> None:
        curve = make_curve(
            [100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0], [30.0, 32.0, 34.0, 36.0, 38.0, 40.0]
        )
        with pytest.raises(ArgumentError):
            bd_rate(curve, curve, QualityRange.HIGH)


# ============================================================
# 3. 饱和点剔除
# ============================================================
class TestSaturation:
    """VMAF / SSIM 等指标的平台区"""

    def test_plateau_point_dropped(self) -> None:
        curve = ctc_curve(metric=MetricId.VMAF, qualities=VMAF_WITH_PLATEAU)
        kept = exclude_saturated(curve)
        assert len(kept) == 5
        assert 110 not in {p.qp for p in kept.points}

    def test_non_saturating_metric_untouched(self) -> None:
        curve = ctc_curve()
        assert exclude_saturated(curve) is curve

    def test_bd_rate_reports_excluded_points(self) -> None:
        anchor = ctc_curve(metric=MetricId.VMAF, qualities=VMAF_WITH_PLATEAU)
        test = ctc_curve(0.9, metric=MetricId.VMAF, qualities=VMAF_WITH_PLATEAU)
        result = bd_rate(anchor, test)
        assert result.value == pytest.approx(-0.1, abs=1e-12)
        assert result.excluded_points == (("anchor", 110), ("test", 110))
        assert result.points_used_anchor == 5


    def test_vmaf_plateau_tail_dropped(self) -> None:
        """[60, 80, 95, 99.9, 99.9, 99.8]：恰好剔除码率最高的两个点"""
        curve = make_curve(VMAF_RATES, VMAF_TAIL, metric=MetricId.VMAF, qps=VMAF_QPS)
        kept = exclude_saturated(curve)
        assert kept.qualities == [60.0, 80.0, 95.0, 99.9]
        assert {p.qp for p in curve.points} - {p.qp for p in kept.points} == {135, 110}

    def test_vmaf_plateau_changes_result(self) -> None:
        """剔除后的结果与把尾部当成有效点的计算不同"""
        anchor = make_curve(VMAF_RATES, VMAF_TAIL, metric=MetricId.VMAF, qps=VMAF_QPS)
        test = make_curve(
            [360.0, 630.0, 1080.0, 1890.0, 1950.0, 2000.0],
            (60.0, 80.0, 95.0, 99.9, 99.95, 99.97),
            metric=MetricId.VMAF,
            qps=VMAF_QPS,
        )
        excluded = bd_rate(anchor, test)
        assert excluded.points_used_anchor == 4
        assert excluded.excluded_points == (("anchor", 135), ("anchor", 110))
        assert excluded.overlap_quality == (60.0, 99.9)

        with pytest.raises(NonMonotonicCurveError):
            bd_rate_curves(anchor, test)
        tail_kept = make_curve(VMAF_RATES, test.qualities, metric=MetricId.VMAF, qps=VMAF_QPS)
        unexcluded = bd_rate(tail_kept, test)
        assert unexcluded.points_used_anchor == 6
        assert abs(unexcluded.value - excluded.value) > 1e-4

    def test_dip_dropped(self) -> None:
        """[50, 70, 65, 80]：中间下凹的 65 被剔除，其余保留"""
        curve = make_curve([100.0, 200.0, 400.0, 800.0], (50.0, 70.0, 65.0, 80.0), metric=MetricId.VMAF)
        kept = exclude_saturated(curve)
        assert kept.qualities == [50.0, 70.0, 80.0]
        assert kept.rates == [100.0, 200.0, 800.0]

    @pytest.mark.parametrize(
        "qualities",
        [(50.0, 70.0, 65.0, 80.0), (60.0, 80.0, 95.0, 99.9, 99.9, 99.8), (60.0, 70.0, 80.0, 90.0)],
    )
    def test_exclusion_idempotent(self, qualities: tuple[float, ...]) -> None:
        rates = [100.0 * 2**i for i in range(len(qualities))]
        once = exclude_saturated(make_curve(rates, qualities, metric=MetricId.VMAF))
        assert exclude_saturated(once) is once
    def test_fully_saturated_curve(self) -> None:
        flat = ctc_curve(metric=MetricId.SSIM, qualities=(0.99,) * 6)
        with pytest.raises(ExclusionError):
            bd_rate(flat, flat)

    def test_psnr_non_monotone_is_data_error(self) -> None:
        """PSNR 系不做剔除，非单调直接报错"""
        broken = ctc_curve(qualities=(41.5, 40.2, 38.6, 39.0, 34.5, 32.0))
        with pytest.raises(NonMonotonicCurveError):
            bd_rate(ctc_curve(), broken)

    def test_non_monotone_error_is_exclusion_exit_code(self) -> None:
        assert issubclass(NonMonotonicCurveError, ExclusionError)


# ============================================================
# 4. 重叠区间与参数错误
# ============================================================
class TestOverlapAndArguments:
    """不重叠、指标不一致、对数底无效"""

    def test_disjoint_qualities(self) -> None:
        shifted = ctc_curve(qualities=tuple(q + 20.0 for q in ANCHOR_QUALITIES))
        with pytest.raises(OverlapError):
            bd_rate(ctc_curve(), shifted)

    def test_touching_qualities(self) -> None:
        low = make_curve([100.0, 200.0], [30.0, 32.0])
        high = make_curve([300.0, 600.0], [32.0, 34.0])
        with pytest.raises(OverlapError):
            bd_rate(low, high)

    def test_partial_overlap_uses_intersection(self) -> None:
        anchor = make_curve([100.0, 200.0, 400.0], [30.0, 32.0, 34.0])
        test = make_curve([150.0, 300.0, 600.0], [31.0, 33.0, 35.0])
        result = bd_rate(anchor, test)
        assert result.overlap_quality == (31.0, 34.0)

    def test_quality_window_narrows_interval(self) -> None:
        result = bd_rate_curves(ctc_curve(), ctc_curve(0.5), quality_window=(34.0, 38.0))
        assert result.overlap_quality == (34.0, 38.0)
        assert result.value == pytest.approx(-0.5, abs=1e-12)

    def test_metric_mismatch(self) -> None:
        with pytest.raises(ArgumentError):
            bd_rate(ctc_curve(), ctc_curve(metric=MetricId.PSNR_U))

    @pytest.mark.parametrize("base", [1.0, 0.0, -2.0])
    def test_invalid_log_base(self, base: float) -> None:
        with pytest.raises(ArgumentError):
            bd_rate(ctc_curve(), ctc_curve(0.9), log_base=base)


# ============================================================
# 5. 平面加权
# ============================================================
class TestWeighted:
    """A·Y + B·Cb + B·Cr"""

    def test_default_weights(self) -> None:
        assert bd_rate_weighted(-0.10, -0.20, -0.30) == pytest.approx(-0.112)

    def test_custom_weights(self) -> None:
        w = PlaneWeights(a=0.5, b=0.25)
        assert bd_rate_weighted(-0.1, 0.1, 0.3, w) == pytest.approx(0.05)

    def test_weights_must_sum_to_one(self) -> None:
        with pytest.raises(ValueError):
            PlaneWeights(a=0.9, b=0.1)

    def test_non_finite_input(self) -> None:
        with pytest.raises(ArgumentError):
            bd_rate_weighted(math.nan, 0.0, 0.0)


# ============================================================
# 6. 与数值积分对照
# ============================================================
class TestQuadratureOracle:
    """解析积分结果与 10^5 点网格上的梯形积分一致"""

    def test_reference_pair(self) -> None:
        anchor = make_curve([100.0, 200.0, 400.0, 800.0], (30.0, 35.0, 40.0, 45.0))
        test = make_curve([90.0, 170.0, 330.0, 640.0], (30.0, 35.0, 40.0, 45.0))
        result = bd_rate(anchor, test)
        assert result.value == pytest.approx(grid_bd_rate(anchor, test), abs=1e-6)
        assert -0.2 < result.value < -0.1

    def test_random_pairs(self) -> None:
        rng = np.random.default_rng(20)
        for _ in range(20):
            anchor, test = (_random_curve(rng) for _ in range(2))
            try:
                expected = grid_bd_rate(anchor, test)
            except OverlapError:
                continue
            assert bd_rate(anchor, test).value == pytest.approx(expected, rel=1e-6, abs=1e-6)

    def test_partial_range_matches_oracle(self) -> None:
        test = ctc_curve(qualities=(41.9, 40.3, 38.9, 36.5, 34.6, 32.4), scale=0.93)
        for quality_range in (QualityRange.LOW, QualityRange.HIGH):
            a, t = select_range(ctc_curve(), quality_range), select_range(test, quality_range)
            assert bd_rate(ctc_curve(), test, quality_range).value == pytest.approx(
                grid_bd_rate(a, t), abs=1e-6
            )
