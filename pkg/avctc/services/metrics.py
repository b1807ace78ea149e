"""PSNR 与码率计算

- 逐平面 PSNR：10·log10(peak² / MSE)，peak = 2^bit_depth − 1，上限为 PSNR_CAP_DB
- 加权 PSNR：按色度格式对各平面的 dB 值加权
- 序列 PSNR：逐帧 dB 的算术平均，再加权
- 码率：FileSize × 8 × fps / (FrameNum × 1000)，保留 6 位小数

SSIM / VMAF 等指标不在这里计算，由 ingest 从外部日志读入。
"""

import math
from collections.abc import Iterable, Sequence
from fractions import Fraction

import numpy as np

from avctc.config.settings import settings
from avctc.exceptions import ArgumentError
from avctc.models.frame import Frame, PlaneBuffer, PsnrTriple
from avctc.models.sequence import ChromaFormat

_PLANE_WEIGHTS: dict[ChromaFormat, tuple[Fraction, Fraction, Fraction]] = {
    ChromaFormat.CF420: (Fraction(7, 8), Fraction(1, 16), Fraction(1, 16)),
    ChromaFormat.CF422: (Fraction(4, 5), Fraction(1, 10), Fraction(1, 10)),
    ChromaFormat.CF444: (Fraction(2, 3), Fraction(1, 6), Fraction(1, 6)),
    ChromaFormat.MONO: (Fraction(1), Fraction(0), Fraction(0)),
}


def plane_weights(chroma: ChromaFormat) -> tuple[Fraction, Fraction, Fraction]:
    """色度格式对应的 (wy, wu, wv)，精确有理数，和为 1"""
    return _PLANE_WEIGHTS[chroma]


def weighted_psnr(y_db: float, u_db: float | None, v_db: float | None, chroma: ChromaFormat) -> float:
    """对逐平面 dB 值加权"""
    wy, wu, wv = plane_weights(chroma)
    if not chroma.has_chroma:
        return y_db
    if u_db is None or v_db is None:
        raise ArgumentError(f"{chroma.value} 加权 PSNR 需要 U/V 平面的值")
    return float(wy) * y_db + float(wu) * u_db + float(wv) * v_db


# ========== PSNR ==========


def psnr_plane(ref: PlaneBuffer, dist: PlaneBuffer, cap_db: float | None = None) -> float:
    """单个平面的 PSNR（dB）

    MSE 为 0 或结果超过上限时返回上限值。

    Raises:
        ArgumentError: 尺寸或位深不一致
    """
    if (ref.width, ref.height) != (dist.width, dist.height):
        raise ArgumentError(
            f"平面尺寸不一致: {ref.width}x{ref.height} vs {dist.width}x{dist.height}"
        )
    if ref.bit_depth != dist.bit_depth:
        raise ArgumentError(f"平面位深不一致: {ref.bit_depth} vs {dist.bit_depth}")
    cap = settings.PSNR_CAP_DB if cap_db is None else cap_db

    diff = ref.samples.astype(np.int64) - dist.samples.astype(np.int64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return cap
    peak = float(ref.max_value)
    return min(cap, 10.0 * math.log10(peak * peak / mse))


def psnr_frame(ref: Frame, dist: Frame, cap_db: float | None = None) -> PsnrTriple:
    """一帧的逐平面 PSNR 与加权 PSNR"""
    if ref.chroma != dist.chroma:
        raise ArgumentError(f"色度格式不一致: {ref.chroma.value} vs {dist.chroma.value}")
    if ref.siting != dist.siting:
        raise ArgumentError(f"色度采样位置不一致: {ref.siting.value} vs {dist.siting.value}")
    if ref.bit_depth != dist.bit_depth:
        raise ArgumentError(f"位深不一致: {ref.bit_depth} vs {dist.bit_depth}")

    y_db = psnr_plane(ref.y, dist.y, cap_db)
    u_db = v_db = None
    if ref.u is not None and ref.v is not None and dist.u is not None and dist.v is not None:
        u_db = psnr_plane(ref.u, dist.u, cap_db)
        v_db = psnr_plane(ref.v, dist.v, cap_db)

    return PsnrTriple(
        y_db=y_db,
        u_db=u_db,
        v_db=v_db,
        weighted_db=weighted_psnr(y_db, u_db, v_db, ref.chroma),
    )


def psnr_frames(
    ref_frames: Iterable[Frame], dist_frames: Iterable[Frame], cap_db: float | None = None
) -> list[PsnrTriple]:
    """逐帧 PSNR

    Raises:
        ArgumentError: 帧数不一致
    """
    try:
        return [psnr_frame(r, d, cap_db) for r, d in zip(ref_frames, dist_frames, strict=True)]
    except ValueError as e:
        if isinstance(e, ArgumentError):
            raise
        raise ArgumentError(f"参考与失真视频帧数不一致: {e}") from e


def pool_psnr(per_frame: Sequence[PsnrTriple], chroma: ChromaFormat) -> PsnrTriple:
    """逐帧 dB 取均值后再加权"""
    if not per_frame:
        raise ArgumentError("序列 PSNR 至少需要 1 帧")

    y_db = float(np.mean([t.y_db for t in per_frame]))
    u_db = v_db = None
    if chroma.has_chroma:
        u_db = float(np.mean([t.u_db for t in per_frame]))
        v_db = float(np.mean([t.v_db for t in per_frame]))
    return PsnrTriple(
        y_db=y_db, u_db=u_db, v_db=v_db, weighted_db=weighted_psnr(y_db, u_db, v_db, chroma)
    )


def psnr_sequence(
    ref_frames: Iterable[Frame], dist_frames: Iterable[Frame], cap_db: float | None = None
) -> PsnrTriple:
    """序列 PSNR：逐帧 dB 取均值后加权"""
    ref_list = list(ref_frames)
    dist_list = list(dist_frames)
    if len(ref_list) != len(dist_list):
        raise ArgumentError(f"参考与失真视频帧数不一致: {len(ref_list)} vs {len(dist_list)}")
    if not ref_list:
        raise ArgumentError("序列 PSNR 至少需要 1 帧")
    return pool_psnr(psnr_frames(ref_list, dist_list, cap_db), ref_list[0].chroma)


# ========== 码率 ==========


def bitrate_kbps_exact(file_size_bytes: int, fps_num: int, fps_denom: int, frame_num: int) -> Fraction:
    """码率的精确有理数值（kbps）"""
    if file_size_bytes < 0:
        raise ArgumentError(f"文件大小不能为负: {file_size_bytes}")
    if fps_num <= 0 or fps_denom <= 0 or frame_num <= 0:
        raise ArgumentError(
            f"帧率和帧数必须为正: fps={fps_num}/{fps_denom}, frames={frame_num}"
        )
    return Fraction(file_size_bytes * 8 * fps_num, fps_denom * frame_num * 1000)


def bitrate_kbps(file_size_bytes: int, fps_num: int, fps_denom: int, frame_num: int) -> float:
    """CTC 码率公式：FileSize × 8 × (fps_num / fps_denom) / (FrameNum × 1000)

    Examples:
        >>> format_kbps(bitrate_kbps(1_000_000, 60000, 1001, 130))
        '3688.619073'
    """
    return float(bitrate_kbps_exact(file_size_bytes, fps_num, fps_denom, frame_num))


def format_kbps(value: float) -> str:
    """码率序列化（默认 6 位小数）"""
    return f"{value:.{settings.BITRATE_DECIMALS}f}"
