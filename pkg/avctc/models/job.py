"""编码任务模型"""

import re
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, model_validator

from avctc.models.sequence import ChromaFormat, ChromaSiting, CodingConfig

Resolution = tuple[int, int]

_PLACEHOLDER = re.compile(r"\{\w+\}")


def partial_path(path: Path) -> Path:
    """外部进程实际写入的临时文件：foo.dec.y4m → foo.dec.part.y4m（保留扩展名）"""
    return path.with_name(f"{path.stem}.part{path.suffix}")


class JobStatus(str, Enum):
    SUCCESS = "success"
    FAILED = "failed"


class JobSpec(BaseModel):
    """一个 (codec, 序列, 配置, 分辨率, QP) 组合的完整执行计划

    命令已经渲染成参数向量，不含未解析的占位符。
    """

    model_config = ConfigDict(frozen=True)

    job_id: str
    codec: str
    sequence: str
    class_label: str
    config: CodingConfig
    qp: int = Field(..., ge=0, le=255)
    resolution: Resolution
    source_resolution: Resolution
    frames: int = Field(..., gt=0)
    tiles: int = Field(default=1, ge=1)
    bit_depth: int = 8
    chroma: ChromaFormat = ChromaFormat.CF420
    siting: ChromaSiting = ChromaSiting.TYPE0_VERTICAL
    fps_num: int = Field(default=30, gt=0)
    fps_denom: int = Field(default=1, gt=0)
    input_path: Path
    source_path: Path
    encode_argv: tuple[str, ...] = Field(..., min_length=1)
    decode_argv: tuple[str, ...] | None = None
    metric_argv: tuple[str, ...] | None = None
    bitstream_path: Path
    decoded_path: Path | None = None
    # 解码结果需要上采样回源分辨率后再算指标（AS 下采样阶梯）
    upsampled_path: Path | None = None
    log_path: Path | None = None

    @model_validator(mode="after")
    def validate_job(self) -> "JobSpec":
        for argv in (self.encode_argv, self.decode_argv, self.metric_argv):
            for arg in argv or ():
                if _PLACEHOLDER.search(arg):
                    raise ValueError(f"命令中存在未解析的占位符: {arg}")
        if self.config is not CodingConfig.ADAPTIVE_STREAMING and self.resolution != self.source_resolution:
            raise ValueError(f"非 AS 任务必须使用源分辨率: {self.resolution}")
        return self

    @property
    def is_rung(self) -> bool:
        """AS 下采样分辨率（不含源分辨率本身）"""
        return self.resolution != self.source_resolution

    @property
    def stages(self) -> list[tuple[str, tuple[str, ...]]]:
        stages = [("encode", self.encode_argv)]
        if self.decode_argv:
            stages.append(("decode", self.decode_argv))
        if self.metric_argv:
            stages.append(("metric", self.metric_argv))
        return stages

    def stage_output(self, stage: str) -> Path | None:
        """阶段的最终输出；命令写的是它的 partial_path，成功后才改名"""
        return {"encode": self.bitstream_path, "decode": self.decoded_path, "metric": self.log_path}.get(stage)


class JobResult(BaseModel):
    """任务执行结果；只有成功的任务带码流大小"""

    model_config = ConfigDict(frozen=True)

    job_id: str
    status: JobStatus
    exit_code: int | None = None
    wall_time_seconds: float = Field(default=0.0, ge=0)
    bitstream_size_bytes: int | None = None
    log_paths: tuple[Path, ...] = ()
    skipped: bool = False
    error: str | None = None

    @model_validator(mode="after")
    def validate_size(self) -> "JobResult":
        if self.status is JobStatus.SUCCESS:
            if self.bitstream_size_bytes is None or self.bitstream_size_bytes <= 0:
                raise ValueError(f"成功的任务必须有非空码流: {self.job_id}")
        elif self.bitstream_size_bytes is not None:
            raise ValueError(f"失败的任务不应记录码流大小: {self.job_id}")
        return self

    @property
    def ok(self) -> bool:
        return self.status is JobStatus.SUCCESS
