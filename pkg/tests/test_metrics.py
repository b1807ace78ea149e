"""PSNR 与码率单元测试"""

import math
from fractions import Fraction

import numpy as np
import pytest

from avctc.exceptions import ArgumentError, VideoFormatError
from avctc.models.frame import Frame, PlaneBuffer, PsnrTriple
from avctc.models.sequence import ChromaFormat, ChromaSiting
from avctc.services.metrics import (
    bitrate_kbps,
    bitrate_kbps_exact,
    format_kbps,
    plane_weights,
    pool_psnr,
    psnr_frame,
    psnr_plane,
    psnr_sequence,
    weighted_psnr,
)
from tests.conftest import make_frame


def _plane(value: int, width: int = 8, height: int = 4, bit_depth: int = 8) -> PlaneBuffer:
    return PlaneBuffer.from_array(np.full((height, width), value), bit_depth)


# ============================================================
# 1. 单平面 PSNR
# ============================================================
class TestPsnrPlane:
    """psnr_plane"""

    def test_constant_offset_8bit(self) -> None:
        """差值恒为 10 → MSE = 100"""
        expected = 10.0 * math.log10(255.0**2 / 100.0)
        assert psnr_plane(_plane(100), _plane(110)) == pytest.approx(expected)

    def test_constant_offset_10bit(self) -> None:
        expected = 10.0 * math.log10(1023.0**2 / 16.0)
        assert psnr_plane(_plane(500, bit_depth=10), _plane(504, bit_depth=10)) == pytest.approx(expected)

    def test_identical_planes_capped(self) -> None:
        assert psnr_plane(_plane(7), _plane(7)) == 100.0

    def test_custom_cap(self) -> None:
        assert psnr_plane(_plane(7), _plane(7), cap_db=60.0) == 60.0
        # 有限值超过上限时同样截断
        assert psnr_plane(_plane(100), _plane(101), cap_db=30.0) == 30.0

    def test_size_mismatch(self) -> None:
        with pytest.raises(ArgumentError):
            psnr_plane(_plane(1, width=8), _plane(1, width=6))

    def test_bit_depth_mismatch(self) -> None:
        with pytest.raises(ArgumentError):
            psnr_plane(_plane(1), _plane(1, bit_depth=10))

    def test_no_uint8_wraparound(self) -> None:
        """0 与 255 的差不能在 uint8 上溢出"""
        expected = 10.0 * math.log10(255.0**2 / 255.0**2)
        assert psnr_plane(_plane(0), _plane(255)) == pytest.approx(expected)


# ============================================================
# 2. 加权 PSNR
# ============================================================
class TestWeightedPsnr:
    """按色度格式加权"""

    @pytest.mark.parametrize("chroma", list(ChromaFormat))
    def test_weights_sum_to_one(self, chroma: ChromaFormat) -> None:
        assert sum(plane_weights(chroma)) == 1

    def test_420_weights(self) -> None:
        assert plane_weights(ChromaFormat.CF420) == (Fraction(7, 8), Fraction(1, 16), Fraction(1, 16))
        assert weighted_psnr(40.0, 44.0, 48.0, ChromaFormat.CF420) == pytest.approx(40.75)

    def test_422_weights(self) -> None:
        assert weighted_psnr(40.0, 45.0, 45.0, ChromaFormat.CF422) == pytest.approx(41.0)

    def test_444_weights(self) -> None:
        assert weighted_psnr(40.0, 46.0, 46.0, ChromaFormat.CF444) == pytest.approx(42.0)

    def test_mono_is_luma(self) -> None:
        assert weighted_psnr(38.0, None, None, ChromaFormat.MONO) == 38.0

    def test_missing_chroma_values(self) -> None:
        with pytest.raises(ArgumentError):
            weighted_psnr(38.0, None, None, ChromaFormat.CF420)


# ============================================================
# 3. 帧与序列
# ============================================================
class TestPsnrFrameAndSequence:
    """psnr_frame / pool_psnr / psnr_sequence"""

    def test_frame_triple(self) -> None:
        ref = make_frame(16, 8, constant=100)
        dist = make_frame(16, 8, constant=110)
        triple = psnr_frame(ref, dist)
        assert triple.y_db == pytest.approx(triple.u_db)
        assert triple.weighted_db == pytest.approx(triple.y_db)

    def test_mono_frame(self) -> None:
        ref = make_frame(16, 8, chroma=ChromaFormat.MONO, seed=1)
        triple = psnr_frame(ref, ref)
        assert triple.u_db is None and triple.v_db is None
        assert triple.weighted_db == 100.0

    def test_siting_mismatch(self) -> None:
        ref = make_frame(16, 8, seed=1)
        dist = make_frame(16, 8, seed=1, siting=ChromaSiting.TYPE2_COLOCATED)
        with pytest.raises(ArgumentError):
            psnr_frame(ref, dist)

    def test_chroma_mismatch(self) -> None:
        with pytest.raises(ArgumentError):
            psnr_frame(make_frame(16, 8), make_frame(16, 8, chroma=ChromaFormat.CF444))

    def test_pool_averages_db_values(self) -> None:
        """先对 dB 取均值，不是对 MSE 取均值"""
        per_frame = [
            PsnrTriple(y_db=30.0, u_db=40.0, v_db=40.0, weighted_db=0.0),
            PsnrTriple(y_db=40.0, u_db=44.0, v_db=48.0, weighted_db=0.0),
        ]
        pooled = pool_psnr(per_frame, ChromaFormat.CF420)
        assert pooled.y_db == pytest.approx(35.0)
        assert pooled.u_db == pytest.approx(42.0)
        assert pooled.v_db == pytest.approx(44.0)
        assert pooled.weighted_db == pytest.approx(35.0 * 7 / 8 + 42.0 / 16 + 44.0 / 16)

    def test_pool_empty(self) -> None:
        with pytest.raises(ArgumentError):
            pool_psnr([], ChromaFormat.CF420)

    def test_sequence(self) -> None:
        ref = [make_frame(16, 8, seed=s) for s in range(3)]
        dist = [make_frame(16, 8, seed=s + 10) for s in range(3)]
        pooled = psnr_sequence(ref, dist)
        assert 0.0 < pooled.y_db < 100.0

    def test_sequence_length_mismatch(self) -> None:
        ref = [make_frame(16, 8, seed=s) for s in range(3)]
        with pytest.raises(ArgumentError):
            psnr_sequence(ref, ref[:2])

    def test_frame_rejects_wrong_chroma_size(self) -> None:
        with pytest.raises(VideoFormatError):
            Frame(y=_plane(1, 8, 4), u=_plane(1, 8, 4), v=_plane(1, 8, 4), chroma=ChromaFormat.CF420)


# ============================================================
# 4. 码率
# ============================================================
class TestBitrate:
    """FileSize × 8 × fps / (FrameNum × 1000)"""

    def test_fractional_fps(self) -> None:
        assert format_kbps(bitrate_kbps(1_000_000, 60000, 1001, 130)) == "3688.619073"

    def test_exact_value(self) -> None:
        assert bitrate_kbps_exact(1000, 30, 1, 1) == Fraction(240)
        assert bitrate_kbps_exact(3, 1, 3, 1) == Fraction(8, 1000)

    def test_zero_size(self) -> None:
        assert bitrate_kbps(0, 30, 1, 10) == 0.0

    @pytest.mark.parametrize(
        "args",
        [(-1, 30, 1, 10), (100, 0, 1, 10), (100, 30, 0, 10), (100, 30, 1, 0)],
    )
    def test_invalid_arguments(self, args: tuple[int, int, int, int]) -> None:
        with pytest.raises(ArgumentError):
            bitrate_kbps(*args)

    def test_format_six_decimals(self) -> None:
        assert format_kbps(1.5) == "1.500000"
