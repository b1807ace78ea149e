"""CTC 空间重采样

Lanczos(α=5) 窗口 sinc，14 bit 定点系数，64 相位多相滤波：
- 每相位固定 2α 个抽头；下采样时按缩放比拉伸核（抗混叠），拉伸后的核截取到这 2α 个抽头内再归一化
- 输出像素 i 对应源坐标 (i + 0.5)·(src/dst) − 0.5 + siting_offset，取最近相位
- 越界抽头复制边缘样本
- 先水平后垂直；每一遍在 int64 中累加，加 2^13 右移 14 位后截断到 [0, 2^bit_depth − 1]

每个相位的系数和恰好为 2^14，所以常数平面在任意缩放比下保持不变。
"""

import csv
import io
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Literal

import numpy as np

from avctc.config.settings import settings
from avctc.exceptions import ArgumentError
from avctc.models.frame import Frame, PlaneBuffer
from avctc.models.sequence import ChromaSiting

logger = logging.getLogger(__name__)

Axis = Literal["horizontal", "vertical"]
Direction = Literal["down", "up"]

# 以色度样本为单位的相位偏移（下采样方向），上采样取相反数
_SITING_OFFSETS: dict[ChromaSiting, tuple[float, float]] = {
    ChromaSiting.TYPE0_VERTICAL: (0.0, -0.25),
    ChromaSiting.TYPE2_COLOCATED: (0.0, 0.0),
    ChromaSiting.CENTER_JPEG: (0.25, 0.25),
}


@dataclass(frozen=True, eq=False)
class FilterBank:
    """多相滤波器组，coeffs.shape = (n_phases, taps_per_phase)"""

    scale_ratio: Fraction
    n_phases: int
    precision_bits: int
    coeffs: np.ndarray

    @property
    def taps_per_phase(self) -> int:
        return int(self.coeffs.shape[1])

    @property
    def first_tap(self) -> int:
        """第 0 个抽头相对 floor(源坐标) 的偏移"""
        return -(self.taps_per_phase // 2 - 1)

    @property
    def unity(self) -> int:
        return 1 << self.precision_bits


@dataclass(frozen=True)
class ResampleSpec:
    """单个方向的重采样参数"""

    src_dim: int
    dst_dim: int
    siting_offset: float = 0.0
    axis: Axis = "horizontal"

    def __post_init__(self) -> None:
        if self.src_dim < 1 or self.dst_dim < 1:
            raise ArgumentError(f"重采样尺寸必须 ≥ 1: {self.src_dim} → {self.dst_dim}")

    @property
    def scale_ratio(self) -> Fraction:
        return Fraction(self.src_dim, self.dst_dim)


# ========== 滤波器组 ==========


def lanczos_kernel(x: np.ndarray, alpha: int) -> np.ndarray:
    """L(x) = sinc(x)·sinc(x/α)，|x| ≥ α 时为 0"""
    return np.where(np.abs(x) < alpha, np.sinc(x) * np.sinc(x / alpha), 0.0)


@lru_cache(maxsize=64)
def _build_filter_bank(ratio: Fraction, n_phases: int, alpha: int, precision_bits: int) -> FilterBank:
    stretch = max(Fraction(1), ratio)
    taps = 2 * alpha
    offsets = np.arange(-(taps // 2 - 1), taps // 2 + 1, dtype=np.float64)
    unity = 1 << precision_bits

    coeffs = np.zeros((n_phases, taps), dtype=np.int64)
    for phase in range(n_phases):
        weights = lanczos_kernel((offsets - phase / n_phases) / float(stretch), alpha)
        row = np.rint(weights / weights.sum() * unity).astype(np.int64)
        # 舍入残差加到幅值最大的抽头上，保证行和恰好为 2^precision
        row[int(np.argmax(np.abs(row)))] += unity - int(row.sum())
        coeffs[phase] = row

    coeffs.setflags(write=False)
    return FilterBank(scale_ratio=ratio, n_phases=n_phases, precision_bits=precision_bits, coeffs=coeffs)


def build_filter_bank(
    scale_ratio: Fraction | int | str,
    n_phases: int | None = None,
    alpha: int | None = None,
    precision_bits: int | None = None,
) -> FilterBank:
    """生成 Lanczos 多相滤波器组

    Args:
        scale_ratio: src/dst，> 1 表示下采样
        n_phases: 相位数，默认 RESAMPLER_PHASES
        alpha: Lanczos 参数，默认 LANCZOS_ALPHA
        precision_bits: 定点精度，默认 FILTER_PRECISION_BITS

    Raises:
        ArgumentError: scale_ratio ≤ 0
    """
    ratio = Fraction(scale_ratio)
    if ratio <= 0:
        raise ArgumentError(f"缩放比必须为正: {scale_ratio}")
    return _build_filter_bank(
        ratio,
        n_phases or settings.RESAMPLER_PHASES,
        alpha or settings.LANCZOS_ALPHA,
        precision_bits or settings.FILTER_PRECISION_BITS,
    )


def emit_filter_bank_csv(bank: FilterBank) -> str:
    """滤波器组导出为 CSV：phase, tap0..tapN-1"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["phase", *(f"tap{i}" for i in range(bank.taps_per_phase))])
    for phase, row in enumerate(bank.coeffs):
        writer.writerow([phase, *(int(c) for c in row)])
    return buffer.getvalue()


# ========== 相位偏移 ==========


def siting_offset(siting: ChromaSiting, axis: Axis, direction: Direction = "down") -> float:
    """色度平面的相位偏移（色度样本单位）"""
    h, v = _SITING_OFFSETS[siting]
    offset = h if axis == "horizontal" else v
    return -offset if direction == "up" else offset


# ========== 重采样 ==========


def _tap_plan(spec: ResampleSpec, bank: FilterBank) -> tuple[np.ndarray, np.ndarray]:
    """每个输出位置的源下标矩阵 (dst, taps) 与相位下标 (dst,)"""
    positions = (np.arange(spec.dst_dim, dtype=np.float64) + 0.5) * float(spec.scale_ratio) - 0.5
    positions += spec.siting_offset
    base = np.floor(positions).astype(np.int64)
    phase = np.rint((positions - base) * bank.n_phases).astype(np.int64)
    # 相位取整到 n_phases 时进位到下一个整数位置
    wrap = phase >= bank.n_phases
    base[wrap] += 1
    phase[wrap] = 0

    taps = base[:, None] + (bank.first_tap + np.arange(bank.taps_per_phase))[None, :]
    return np.clip(taps, 0, spec.src_dim - 1), phase


def _resample_axis(samples: np.ndarray, spec: ResampleSpec, bank: FilterBank, max_value: int) -> np.ndarray:
    """沿最后一维重采样，samples 为 int64"""
    taps, phase = _tap_plan(spec, bank)
    coeffs = bank.coeffs[phase]  # (dst, taps)

    acc = np.zeros(samples.shape[:-1] + (spec.dst_dim,), dtype=np.int64)
    for t in range(bank.taps_per_phase):
        acc += samples[..., taps[:, t]] * coeffs[:, t]

    rounding = 1 << (bank.precision_bits - 1)
    return np.clip((acc + rounding) >> bank.precision_bits, 0, max_value)


def resample_plane(
    src: PlaneBuffer,
    h_spec: ResampleSpec,
    v_spec: ResampleSpec,
    banks: tuple[FilterBank, FilterBank] | None = None,
) -> PlaneBuffer:
    """可分离重采样：先水平后垂直

    Raises:
        ArgumentError: spec 与平面尺寸不符
    """
    if h_spec.src_dim != src.width or v_spec.src_dim != src.height:
        raise ArgumentError(
            f"重采样参数 {h_spec.src_dim}x{v_spec.src_dim} 与平面尺寸 {src.width}x{src.height} 不符"
        )
    h_bank, v_bank = banks or (
        build_filter_bank(h_spec.scale_ratio),
        build_filter_bank(v_spec.scale_ratio),
    )

    samples = src.samples.astype(np.int64)
    samples = _resample_axis(samples, h_spec, h_bank, src.max_value)
    samples = _resample_axis(samples.T, v_spec, v_bank, src.max_value).T
    return PlaneBuffer.from_array(samples, src.bit_depth)


def resample_frame(frame: Frame, dst_width: int, dst_height: int) -> Frame:
    """整帧重采样，色度平面按 siting 施加相位偏移

    偏移只作用于尺寸发生变化的方向，1:1 时输出与输入逐位一致。
    """
    src_w, src_h = frame.y.width, frame.y.height
    direction: Direction = "down" if dst_width * dst_height <= src_w * src_h else "up"

    y = resample_plane(
        frame.y,
        ResampleSpec(src_w, dst_width, 0.0, "horizontal"),
        ResampleSpec(src_h, dst_height, 0.0, "vertical"),
    )
    if frame.u is None or frame.v is None:
        return Frame(y=y, u=None, v=None, chroma=frame.chroma, siting=frame.siting)

    sx, sy = frame.chroma.subsampling
    c_dst_w, c_dst_h = -(-dst_width // sx), -(-dst_height // sy)
    c_src_w, c_src_h = frame.u.width, frame.u.height
    h_offset = siting_offset(frame.siting, "horizontal", direction) if c_src_w != c_dst_w else 0.0
    v_offset = siting_offset(frame.siting, "vertical", direction) if c_src_h != c_dst_h else 0.0
    h_spec = ResampleSpec(c_src_w, c_dst_w, h_offset, "horizontal")
    v_spec = ResampleSpec(c_src_h, c_dst_h, v_offset, "vertical")

    return Frame(
        y=y,
        u=resample_plane(frame.u, h_spec, v_spec),
        v=resample_plane(frame.v, h_spec, v_spec),
        chroma=frame.chroma,
        siting=frame.siting,
    )
