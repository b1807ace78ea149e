"""运行清单（RunManifest）模型

清单是 TOML 文件，描述一次评测：编解码器命令模板、序列列表、
要跑的配置、QP 覆盖、AS 阶梯和输出目录。
"""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from avctc.models.rd import QpSet
from avctc.models.sequence import ChromaFormat, ChromaSiting, CodingConfig, SequenceInfo

Resolution = tuple[int, int]


class CodecTemplates(BaseModel):
    """一个编解码器的命令模板

    模板使用 {占位符} 语法；encode 必须包含 {input} {output} {qp} {width} {height}。
    decode / metric 可选，没有 metric 模板时需要外部提供指标日志。
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    encode: str = Field(..., min_length=1)
    decode: str | None = None
    metric: str | None = None
    # 按类别配置 tile 数（例如 4K RA 用 4 个 tile），未列出的类别用 default_tiles
    tiles: dict[str, int] = Field(default_factory=dict)
    default_tiles: int = Field(default=1, ge=1)

    def tiles_for(self, class_label: str) -> int:
        return self.tiles.get(class_label, self.default_tiles)


class SequenceEntry(BaseModel):
    """清单中的一个测试序列"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(..., min_length=1)
    class_label: str = Field(..., min_length=1)
    path: Path
    width: int = Field(..., gt=0)
    height: int = Field(..., gt=0)
    bit_depth: Literal[8, 10] = 8
    chroma: ChromaFormat = ChromaFormat.CF420
    fps_num: int = Field(default=30, gt=0)
    fps_denom: int = Field(default=1, gt=0)
    frame_count: int = Field(default=130, gt=0)
    hdr: bool = False
    siting: ChromaSiting | None = None

    def to_info(self) -> SequenceInfo:
        return SequenceInfo(
            name=self.name,
            class_label=self.class_label,
            width=self.width,
            height=self.height,
            bit_depth=self.bit_depth,
            chroma=self.chroma,
            fps_num=self.fps_num,
            fps_denom=self.fps_denom,
            frame_count=self.frame_count,
            hdr_flag=self.hdr,
            siting=self.siting,
        )

    @property
    def is_y4m(self) -> bool:
        return self.path.suffix.lower() == ".y4m"


class LadderEntry(BaseModel):
    """AS 分辨率阶梯覆盖：源分辨率 → 下采样分辨率列表"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    source: Resolution
    rungs: tuple[Resolution, ...] = Field(..., min_length=1)

    @field_validator("rungs")
    @classmethod
    def validate_rungs(cls, v: tuple[Resolution, ...]) -> tuple[Resolution, ...]:
        if any(w <= 0 or h <= 0 for w, h in v):
            raise ValueError(f"阶梯分辨率必须为正: {v}")
        return v


class RunManifest(BaseModel):
    """一次评测的声明式描述"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "ctc"
    output_dir: Path = Path("out")
    parallelism: int = Field(default=1, ge=1)
    configs: tuple[CodingConfig, ...] = Field(..., min_length=1)
    codecs: dict[str, CodecTemplates] = Field(..., min_length=1)
    sequences: tuple[SequenceEntry, ...] = Field(..., min_length=1)
    qp_overrides: dict[CodingConfig, QpSet] = Field(default_factory=dict)
    ladders: tuple[LadderEntry, ...] = ()
    ciede2000_higher_is_better: bool = True

    @field_validator("qp_overrides", mode="before")
    @classmethod
    def coerce_qp_lists(cls, v: object) -> object:
        """允许 TOML 中直接写 RA = [110, ...]"""
        if isinstance(v, dict):
            return {k: {"qps": q} if isinstance(q, list | tuple) else q for k, q in v.items()}
        return v

    @field_validator("sequences")
    @classmethod
    def validate_unique_names(cls, v: tuple[SequenceEntry, ...]) -> tuple[SequenceEntry, ...]:
        names = [s.name for s in v]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"序列名重复: {', '.join(duplicates)}")
        return v

    def ladder_overrides(self) -> dict[Resolution, tuple[Resolution, ...]]:
        return {entry.source: entry.rungs for entry in self.ladders}

    def sequence(self, name: str) -> SequenceEntry:
        for entry in self.sequences:
            if entry.name == name:
                return entry
        raise KeyError(name)
