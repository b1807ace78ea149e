"""原始视频帧模型

PlaneBuffer / Frame 持有 numpy 数组，不使用 pydantic。
构造时校验尺寸和取值范围，并把数组设为只读。
"""

from dataclasses import dataclass

import numpy as np

from avctc.exceptions import VideoFormatError
from avctc.models.sequence import ChromaFormat, ChromaSiting


@dataclass(frozen=True, eq=False)
class PlaneBuffer:
    """单个平面：行优先的整数样本，shape = (height, width)"""

    width: int
    height: int
    bit_depth: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise VideoFormatError(f"平面尺寸无效: {self.width}x{self.height}")
        if self.bit_depth not in (8, 10):
            raise VideoFormatError(f"不支持的位深: {self.bit_depth}")
        if self.samples.shape != (self.height, self.width):
            raise VideoFormatError(
                f"样本数组形状 {self.samples.shape} 与尺寸 {self.width}x{self.height} 不符"
            )
        if self.samples.size and (
            int(self.samples.min()) < 0 or int(self.samples.max()) >= (1 << self.bit_depth)
        ):
            raise VideoFormatError(
                f"样本值超出 {self.bit_depth} bit 范围: "
                f"[{int(self.samples.min())}, {int(self.samples.max())}]"
            )
        self.samples.setflags(write=False)

    @classmethod
    def from_array(cls, samples: np.ndarray, bit_depth: int) -> "PlaneBuffer":
        arr = np.array(samples, dtype=np.uint16 if bit_depth > 8 else np.uint8, copy=True)
        height, width = arr.shape
        return cls(width=width, height=height, bit_depth=bit_depth, samples=arr)

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PlaneBuffer):
            return NotImplemented
        return (
            self.bit_depth == other.bit_depth
            and self.samples.shape == other.samples.shape
            and bool(np.array_equal(self.samples, other.samples))
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class Frame:
    """一帧 YUV 图像；MONO 格式下 u / v 为 None"""

    y: PlaneBuffer
    u: PlaneBuffer | None
    v: PlaneBuffer | None
    chroma: ChromaFormat
    siting: ChromaSiting = ChromaSiting.TYPE0_VERTICAL

    def __post_init__(self) -> None:
        if not self.chroma.has_chroma:
            if self.u is not None or self.v is not None:
                raise VideoFormatError("MONO 帧不应包含色度平面")
            return
        if self.u is None or self.v is None:
            raise VideoFormatError(f"{self.chroma.value} 帧缺少色度平面")

        sx, sy = self.chroma.subsampling
        expected = (-(-self.y.width // sx), -(-self.y.height // sy))
        for name, plane in (("U", self.u), ("V", self.v)):
            if (plane.width, plane.height) != expected:
                raise VideoFormatError(
                    f"{name} 平面尺寸 {plane.width}x{plane.height} 与 "
                    f"{self.chroma.value} 期望的 {expected[0]}x{expected[1]} 不符"
                )
            if plane.bit_depth != self.y.bit_depth:
                raise VideoFormatError(f"{name} 平面位深与亮度不一致")

    @property
    def bit_depth(self) -> int:
        return self.y.bit_depth

    @property
    def planes(self) -> tuple[PlaneBuffer, ...]:
        if self.u is None or self.v is None:
            return (self.y,)
        return (self.y, self.u, self.v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (
            self.chroma == other.chroma
            and self.siting == other.siting
            and self.y == other.y
            and self.u == other.u
            and self.v == other.v
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class PsnrTriple:
    """逐平面 PSNR 及按色度格式加权后的 PSNR（dB）"""

    y_db: float
    u_db: float | None
    v_db: float | None
    weighted_db: float
