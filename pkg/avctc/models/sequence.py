"""序列与编码配置模型

测试序列的源信息（分辨率、位深、色度格式、帧率）以及 CTC 编码配置枚举。
所有模型构造后不可变，可以在线程间安全共享。
"""

from enum import Enum
from fractions import Fraction
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ChromaFormat(str, Enum):
    """色度采样格式"""

    CF420 = "420"
    CF422 = "422"
    CF444 = "444"
    MONO = "mono"  # 仅亮度，静态图像边界情况

    @property
    def subsampling(self) -> tuple[int, int]:
        """(水平, 垂直) 色度下采样因子；MONO 没有色度平面"""
        return _SUBSAMPLING[self]

    @property
    def has_chroma(self) -> bool:
        return self is not ChromaFormat.MONO


_SUBSAMPLING: dict[ChromaFormat, tuple[int, int]] = {
    ChromaFormat.CF420: (2, 2),
    ChromaFormat.CF422: (2, 1),
    ChromaFormat.CF444: (1, 1),
    ChromaFormat.MONO: (1, 1),
}


class ChromaSiting(str, Enum):
    """色度采样位置"""

    TYPE0_VERTICAL = "type0"  # 非 HDR（BT.709）视频
    TYPE2_COLOCATED = "type2"  # HDR，与亮度 (0,0) 共位
    CENTER_JPEG = "jpeg"  # 静态图像，中心对齐


class CodingConfig(str, Enum):
    """CTC 编码配置"""

    STILL_IMAGE = "SI"
    ALL_INTRA = "AI"
    RANDOM_ACCESS = "RA"
    LOW_DELAY = "LD"
    ADAPTIVE_STREAMING = "AS"


STILL_IMAGE_CLASS = "F"
ECF_CLASS_PREFIX = "ECF"


def siting_for(hdr: bool, still_image: bool) -> ChromaSiting:
    """按内容类型选择色度采样位置

    非 HDR 视频 → Type 0；HDR → Type 2；静态图像 → JPEG 中心对齐。
    """
    if still_image:
        return ChromaSiting.CENTER_JPEG
    if hdr:
        return ChromaSiting.TYPE2_COLOCATED
    return ChromaSiting.TYPE0_VERTICAL


class SequenceInfo(BaseModel):
    """测试序列的源信息

    fps_num / fps_denom 直接进入码率公式（例如 60000/1001 对应 59.94 fps）。
    """

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1, description="序列名")
    class_label: str = Field(..., min_length=1, description="CTC 类别，如 A1、B2、E、F、G、ECF-422")
    width: int = Field(..., gt=0)
    height: int = Field(..., gt=0)
    bit_depth: Literal[8, 10] = 8
    chroma: ChromaFormat = ChromaFormat.CF420
    fps_num: int = Field(default=30, gt=0)
    fps_denom: int = Field(default=1, gt=0)
    frame_count: int = Field(default=1, gt=0, description="源文件总帧数")
    hdr_flag: bool = False
    siting: ChromaSiting = ChromaSiting.TYPE0_VERTICAL

    @model_validator(mode="before")
    @classmethod
    def default_siting(cls, data: Any) -> Any:
        """未显式指定 siting 时按内容类型推导"""
        if isinstance(data, dict) and data.get("siting") is None:
            data = dict(data)
            still = str(data.get("class_label", "")).upper() == STILL_IMAGE_CLASS
            data["siting"] = siting_for(bool(data.get("hdr_flag", False)), still)
        return data

    @property
    def fps(self) -> Fraction:
        return Fraction(self.fps_num, self.fps_denom)

    @property
    def is_ecf(self) -> bool:
        return self.class_label.upper().startswith(ECF_CLASS_PREFIX)

    @property
    def is_still_image(self) -> bool:
        return self.class_label.upper() == STILL_IMAGE_CLASS

    @property
    def resolution(self) -> tuple[int, int]:
        return (self.width, self.height)
