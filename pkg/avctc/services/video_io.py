"""原始视频读写

支持两种容器：
- 平面 raw（.yuv）：Y、U、V 依次存放；8 bit 每样本 1 字节，10 bit 每样本 2 字节小端、低位对齐
- Y4M：文件头给出几何、帧率和色度格式，每帧以 FRAME 行开头

读取是单遍流式的，一次只持有一帧。
"""

import logging
import os
import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import BinaryIO

import numpy as np

from avctc.exceptions import VideoFormatError
from avctc.models.frame import Frame, PlaneBuffer
from avctc.models.sequence import ChromaFormat, ChromaSiting, SequenceInfo
from avctc.utils.file_io import atomic_open

logger = logging.getLogger(__name__)

Y4M_MAGIC = b"YUV4MPEG2"
Y4M_FRAME = b"FRAME"

# Y4M 色度标签 → (色度格式, 位深)
_Y4M_COLORSPACES: dict[str, tuple[ChromaFormat, int]] = {
    "420": (ChromaFormat.CF420, 8),
    "420jpeg": (ChromaFormat.CF420, 8),
    "420mpeg2": (ChromaFormat.CF420, 8),
    "420paldv": (ChromaFormat.CF420, 8),
    "422": (ChromaFormat.CF422, 8),
    "444": (ChromaFormat.CF444, 8),
    "mono": (ChromaFormat.MONO, 8),
    "420p10": (ChromaFormat.CF420, 10),
    "422p10": (ChromaFormat.CF422, 10),
    "444p10": (ChromaFormat.CF444, 10),
    "mono10": (ChromaFormat.MONO, 10),
}


@dataclass(frozen=True)
class Y4mHeader:
    width: int
    height: int
    fps: Fraction
    chroma: ChromaFormat
    bit_depth: int

    @property
    def colorspace_tag(self) -> str:
        base = {
            ChromaFormat.CF420: "420",
            ChromaFormat.CF422: "422",
            ChromaFormat.CF444: "444",
            ChromaFormat.MONO: "mono",
        }[self.chroma]
        if self.bit_depth == 8:
            return "420jpeg" if self.chroma is ChromaFormat.CF420 else base
        return f"{base}10" if self.chroma is ChromaFormat.MONO else f"{base}p10"

    def encode(self) -> bytes:
        return (
            f"YUV4MPEG2 W{self.width} H{self.height} "
            f"F{self.fps.numerator}:{self.fps.denominator} Ip A1:1 C{self.colorspace_tag}\n"
        ).encode("ascii")


# ========== 几何 ==========


def plane_shapes(width: int, height: int, chroma: ChromaFormat) -> list[tuple[int, int]]:
    """各平面的 (height, width)；色度尺寸向上取整"""
    shapes = [(height, width)]
    if chroma.has_chroma:
        sx, sy = chroma.subsampling
        chroma_shape = (-(-height // sy), -(-width // sx))
        shapes += [chroma_shape, chroma_shape]
    return shapes


def frame_size_bytes(width: int, height: int, chroma: ChromaFormat, bit_depth: int) -> int:
    bytes_per_sample = 1 if bit_depth == 8 else 2
    return sum(h * w for h, w in plane_shapes(width, height, chroma)) * bytes_per_sample


def _sample_dtype(bit_depth: int) -> np.dtype:
    return np.dtype(np.uint8) if bit_depth == 8 else np.dtype("<u2")


def _decode_frame(payload: bytes, info: SequenceInfo) -> Frame:
    dtype = _sample_dtype(info.bit_depth)
    native = np.uint8 if info.bit_depth == 8 else np.uint16
    planes: list[PlaneBuffer] = []
    offset = 0
    for h, w in plane_shapes(info.width, info.height, info.chroma):
        count = h * w
        arr = np.frombuffer(payload, dtype=dtype, count=count, offset=offset).reshape(h, w)
        offset += count * dtype.itemsize
        planes.append(
            PlaneBuffer(width=w, height=h, bit_depth=info.bit_depth, samples=arr.astype(native))
        )
    if len(planes) == 1:
        return Frame(y=planes[0], u=None, v=None, chroma=info.chroma, siting=info.siting)
    return Frame(y=planes[0], u=planes[1], v=planes[2], chroma=info.chroma, siting=info.siting)


def _encode_frame(frame: Frame) -> bytes:
    dtype = _sample_dtype(frame.bit_depth)
    return b"".join(np.ascontiguousarray(p.samples, dtype=dtype).tobytes() for p in frame.planes)


# ========== Y4M ==========


def _read_header_line(f: BinaryIO) -> bytes:
    line = f.readline(4096)
    if not line.endswith(b"\n"):
        raise VideoFormatError("Y4M 文件头不完整")
    return line[:-1]


def parse_y4m_header(line: bytes) -> Y4mHeader:
    """解析 Y4M 流头

    Raises:
        VideoFormatError: 不是 Y4M 或缺少必要字段
    """
    tokens = line.split()
    if not tokens or tokens[0] != Y4M_MAGIC:
        raise VideoFormatError("不是 Y4M 文件（缺少 YUV4MPEG2 标记）")

    fields: dict[str, str] = {}
    for token in tokens[1:]:
        text = token.decode("ascii", errors="replace")
        fields.setdefault(text[0], text[1:])

    try:
        width = int(fields["W"])
        height = int(fields["H"])
    except (KeyError, ValueError) as e:
        raise VideoFormatError(f"Y4M 文件头缺少有效的宽高: {line!r}") from e

    fps = Fraction(30, 1)
    if "F" in fields:
        match = re.fullmatch(r"(\d+):(\d+)", fields["F"])
        if not match or int(match.group(2)) == 0:
            raise VideoFormatError(f"Y4M 帧率无效: {fields['F']}")
        fps = Fraction(int(match.group(1)), int(match.group(2)))

    tag = fields.get("C", "420")
    if tag not in _Y4M_COLORSPACES:
        raise VideoFormatError(f"不支持的 Y4M 色度格式: C{tag}")
    chroma, bit_depth = _Y4M_COLORSPACES[tag]
    return Y4mHeader(width=width, height=height, fps=fps, chroma=chroma, bit_depth=bit_depth)


def read_y4m_header(path: str | Path) -> Y4mHeader:
    with open(path, "rb") as f:
        return parse_y4m_header(_read_header_line(f))


def _check_header(header: Y4mHeader, info: SequenceInfo, path: Path) -> None:
    mismatches = []
    if (header.width, header.height) != (info.width, info.height):
        mismatches.append(f"分辨率 {header.width}x{header.height} ≠ {info.width}x{info.height}")
    if header.chroma != info.chroma:
        mismatches.append(f"色度格式 {header.chroma.value} ≠ {info.chroma.value}")
    if header.bit_depth != info.bit_depth:
        mismatches.append(f"位深 {header.bit_depth} ≠ {info.bit_depth}")
    if mismatches:
        raise VideoFormatError(f"{path.name}: Y4M 文件头与序列信息不符: {'; '.join(mismatches)}")


def info_from_y4m(path: str | Path, class_label: str = "Y4M") -> SequenceInfo:
    """由 Y4M 文件头构造序列信息"""
    header = read_y4m_header(path)
    return SequenceInfo(
        name=Path(path).stem,
        class_label=class_label,
        width=header.width,
        height=header.height,
        bit_depth=header.bit_depth,  # type: ignore[arg-type]
        chroma=header.chroma,
        fps_num=header.fps.numerator,
        fps_denom=header.fps.denominator,
    )


# ========== 读取 ==========


def is_y4m(path: str | Path) -> bool:
    return Path(path).suffix.lower() == ".y4m"


def read_raw_video(path: str | Path, info: SequenceInfo, max_frames: int | None = None) -> Iterator[Frame]:
    """逐帧读取 raw / Y4M 视频

    Raises:
        VideoFormatError: 文件截断、Y4M 头不匹配、样本越界
    """
    path = Path(path)
    frame_bytes = frame_size_bytes(info.width, info.height, info.chroma, info.bit_depth)

    with open(path, "rb") as f:
        y4m = is_y4m(path)
        if y4m:
            _check_header(parse_y4m_header(_read_header_line(f)), info, path)
        else:
            size = path.stat().st_size
            if size % frame_bytes:
                raise VideoFormatError(
                    f"{path.name}: 文件大小 {size} 不是帧大小 {frame_bytes} 的整数倍"
                )

        index = 0
        while max_frames is None or index < max_frames:
            if y4m:
                marker = f.readline(1024)
                if not marker:
                    break
                if not marker.startswith(Y4M_FRAME) or not marker.endswith(b"\n"):
                    raise VideoFormatError(f"{path.name}: 第 {index} 帧缺少 FRAME 标记")
            payload = f.read(frame_bytes)
            if not payload:
                if y4m:
                    raise VideoFormatError(f"{path.name}: 第 {index} 帧数据缺失")
                break
            if len(payload) != frame_bytes:
                raise VideoFormatError(
                    f"{path.name}: 第 {index} 帧被截断（{len(payload)}/{frame_bytes} 字节）"
                )
            yield _decode_frame(payload, info)
            index += 1

    logger.debug("📼 读取 %s: %d 帧", path.name, index)


def count_frames(path: str | Path, info: SequenceInfo) -> int:
    """统计帧数，只看文件大小和 FRAME 标记，不解码样本

    Raises:
        VideoFormatError: 文件截断或 Y4M 头不匹配
    """
    path = Path(path)
    frame_bytes = frame_size_bytes(info.width, info.height, info.chroma, info.bit_depth)
    size = path.stat().st_size
    if not is_y4m(path):
        if size % frame_bytes:
            raise VideoFormatError(f"{path.name}: 文件大小 {size} 不是帧大小 {frame_bytes} 的整数倍")
        return size // frame_bytes

    count = 0
    with open(path, "rb") as f:
        _check_header(parse_y4m_header(_read_header_line(f)), info, path)
        while marker := f.readline(1024):
            if not marker.startswith(Y4M_FRAME) or not marker.endswith(b"\n"):
                raise VideoFormatError(f"{path.name}: 第 {count} 帧缺少 FRAME 标记")
            if f.seek(frame_bytes, os.SEEK_CUR) > size:
                raise VideoFormatError(f"{path.name}: 第 {count} 帧被截断")
            count += 1
    return count


# ========== 写入 ==========


def write_raw_video(
    path: str | Path, frames: Iterable[Frame], fps: Fraction = Fraction(30, 1), y4m: bool | None = None
) -> int:
    """写出视频（按扩展名选择 raw / Y4M），返回帧数"""
    path = Path(path)
    as_y4m = is_y4m(path) if y4m is None else y4m
    count = 0
    with atomic_open(path, "wb") as f:
        for frame in frames:
            if as_y4m and count == 0:
                header = Y4mHeader(
                    width=frame.y.width,
                    height=frame.y.height,
                    fps=fps,
                    chroma=frame.chroma,
                    bit_depth=frame.bit_depth,
                )
                f.write(header.encode())
            if as_y4m:
                f.write(Y4M_FRAME + b"\n")
            f.write(_encode_frame(frame))
            count += 1
    logger.debug("📼 写出 %s: %d 帧", path.name, count)
    return count
