"""公共测试工具与 fixture"""

import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pytest
from scipy.interpolate import PchipInterpolator

from avctc.exceptions import OverlapError
from avctc.models.frame import Frame, PlaneBuffer
from avctc.models.rd import MetricId, RDCurve, RDPoint
from avctc.models.sequence import ChromaFormat, ChromaSiting, CodingConfig

FIXTURES = Path(__file__).parent / "fixtures"

# RA 的 6 个 QP（升序）与一条典型的 PSNR 曲线
RA_QPS = (110, 135, 160, 185, 210, 235)
ANCHOR_RATES = (6500.0, 3700.0, 2100.0, 1200.0, 700.0, 400.0)  # 与 RA_QPS 一一对应
ANCHOR_QUALITIES = (41.5, 40.2, 38.6, 36.7, 34.5, 32.0)


def make_curve(
    rates: Sequence[float],
    qualities: Sequence[float],
    metric: MetricId = MetricId.PSNR_Y,
    qps: Sequence[int | None] | None = None,
    sequence: str = "seq",
    config: CodingConfig = CodingConfig.RANDOM_ACCESS,
    resolution: tuple[int, int] | None = None,
) -> RDCurve:
    """构造 RD 曲线；qps 缺省时不带 QP"""
    qps = qps if qps is not None else [None] * len(rates)
    return RDCurve.from_points(
        sequence,
        config,
        metric,
        [
            RDPoint(qp=qp, bitrate_kbps=r, quality=q, metric_id=metric)
            for r, q, qp in zip(rates, qualities, qps, strict=True)
        ],
        resolution=resolution,
    )


def ctc_curve(
    scale: float = 1.0,
    metric: MetricId = MetricId.PSNR_Y,
    sequence: str = "seq",
    qualities: Sequence[float] = ANCHOR_QUALITIES,
    resolution: tuple[int, int] | None = None,
    config: CodingConfig = CodingConfig.RANDOM_ACCESS,
) -> RDCurve:
    """6 个 RA QP 的曲线，码率整体乘以 scale"""
    return make_curve(
        [r * scale for r in ANCHOR_RATES],
        qualities,
        metric=metric,
        qps=RA_QPS,
        sequence=sequence,
        config=config,
        resolution=resolution,
    )


def grid_bd_rate(anchor: RDCurve, test: RDCurve) -> float:
    """独立实现：两条 PCHIP 在 10^5 点网格上求梯形积分"""
    lo = max(min(anchor.qualities), min(test.qualities))
    hi = min(max(anchor.qualities), max(test.qualities))
    if not lo < hi:
        raise OverlapError(f"[{lo}, {hi}]")
    grid = np.linspace(lo, hi, 100_000)
    diff = [
        sign * PchipInterpolator(c.qualities, np.log(c.rates))(grid)
        for sign, c in ((1.0, test), (-1.0, anchor))
    ]
    return math.exp(np.trapezoid(diff[0] + diff[1], grid) / (hi - lo)) - 1.0


def make_frame(
    width: int,
    height: int,
    chroma: ChromaFormat = ChromaFormat.CF420,
    bit_depth: int = 8,
    seed: int = 0,
    constant: int | None = None,
    siting: ChromaSiting = ChromaSiting.TYPE0_VERTICAL,
) -> Frame:
    """随机（或常数）内容的帧"""
    rng = np.random.default_rng(seed)
    peak = (1 << bit_depth) - 1

    def plane(w: int, h: int) -> PlaneBuffer:
        if constant is not None:
            data = np.full((h, w), constant)
        else:
            data = rng.integers(0, peak + 1, size=(h, w))
        return PlaneBuffer.from_array(data, bit_depth)

    y = plane(width, height)
    if not chroma.has_chroma:
        return Frame(y=y, u=None, v=None, chroma=chroma, siting=siting)
    sx, sy = chroma.subsampling
    cw, ch = -(-width // sx), -(-height // sy)
    return Frame(y=y, u=plane(cw, ch), v=plane(cw, ch), chroma=chroma, siting=siting)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
