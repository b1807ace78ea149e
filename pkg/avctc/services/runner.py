"""编码任务编排

职责：
1. 读取并校验 TOML 运行清单
2. 展开 codec × 配置 × 序列 × (AS 阶梯分辨率) × 6 个 QP 的任务
3. 为 AS 阶梯生成下采样输入（Lanczos 重采样）
4. 用 asyncio 子进程并发执行（Semaphore 限制并发），失败不影响其他任务
5. 按码流大小计算码率，读取指标日志，交给 ingest 构造 RD 曲线

任务状态追加写入输出目录下的纯文本台账。外部命令先写 .part 临时文件，退出码为 0 才改名为正式输出；
重跑时只跳过台账中最后一次成功且输出齐全的任务。
"""

import asyncio
import json
import logging
import math
import time
import tomllib
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from avctc.config.settings import settings
from avctc.exceptions import (
    ArgumentError,
    AvCtcError,
    CollectError,
    ConfigurationError,
    ParseError,
    TemplateError,
    VideoFormatError,
)
from avctc.models.job import JobResult, JobSpec, JobStatus, partial_path
from avctc.models.manifest import CodecTemplates, RunManifest, SequenceEntry
from avctc.models.metric_log import CurveKey, MetricLog
from avctc.models.rd import MetricId, RDCurve
from avctc.models.sequence import CodingConfig, SequenceInfo
from avctc.services.command_template import (
    REQUIRED_DECODE_VARIABLES,
    REQUIRED_ENCODE_VARIABLES,
    REQUIRED_METRIC_VARIABLES,
    format_argv,
    render_argv,
    validate_template,
)
from avctc.services.ctc_rules import as_ladder_for, frame_count_for, qp_set_for
from avctc.services.ingest import curves_from_logs, parse_metric_log
from avctc.services.metrics import bitrate_kbps, psnr_frames
from avctc.services.resampler import resample_frame
from avctc.services.video_io import count_frames, read_raw_video, write_raw_video
from avctc.utils.file_io import atomic_write_text
from avctc.utils.run_stats import RunStatistics

logger = logging.getLogger(__name__)

Resolution = tuple[int, int]

LEDGER_COLUMNS = ("job_id", "status", "exit_code", "wall_time_s", "bitstream_bytes", "skipped")


# ==================== 清单 ====================


def _resolve(base: Path, value: Any) -> Any:
    if isinstance(value, str):
        path = Path(value).expanduser()
        return str(path if path.is_absolute() else base / path)
    return value


def validate_codec_templates(name: str, templates: CodecTemplates) -> None:
    """校验一个 codec 的三个命令模板

    Raises:
        TemplateError: 模板缺少必需占位符或含未知占位符
        ConfigurationError: 有 metric 模板却没有 decode 模板
    """
    try:
        validate_template(templates.encode, REQUIRED_ENCODE_VARIABLES)
        if templates.decode is not None:
            validate_template(templates.decode, REQUIRED_DECODE_VARIABLES)
        if templates.metric is not None:
            validate_template(templates.metric, REQUIRED_METRIC_VARIABLES)
    except TemplateError as e:
        raise TemplateError(f"codec {name}: {e}") from e
    if templates.metric is not None and templates.decode is None:
        raise ConfigurationError(f"codec {name}: metric 模板需要同时配置 decode 模板")


def load_manifest(path: str | Path, check_files: bool = True) -> RunManifest:
    """读取 TOML 清单，相对路径按清单所在目录解析

    Args:
        path: 清单文件
        check_files: 是否检查序列文件存在

    Raises:
        ParseError: TOML 语法错误或文件不可读
        ConfigurationError: 字段校验失败、序列文件不存在
        TemplateError: 命令模板无效
    """
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ParseError(f"无法读取清单 {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ParseError(f"清单 {path.name} 不是有效的 TOML: {e}") from e

    base = path.resolve().parent
    raw["output_dir"] = _resolve(base, raw.get("output_dir", "out"))
    for entry in raw.get("sequences", []):
        if isinstance(entry, dict) and "path" in entry:
            entry["path"] = _resolve(base, entry["path"])

    try:
        manifest = RunManifest.model_validate(raw)
    except ValidationError as e:
        raise ConfigurationError(f"清单 {path.name} 校验失败: {e}") from e

    for name, templates in manifest.codecs.items():
        validate_codec_templates(name, templates)

    if check_files:
        missing = [s.name for s in manifest.sequences if not s.path.is_file()]
        if missing:
            raise ConfigurationError(f"序列文件不存在: {', '.join(missing)}")
        for entry in manifest.sequences:
            try:
                available = count_frames(entry.path, entry.to_info())
            except VideoFormatError as e:
                raise ConfigurationError(f"序列 {entry.name} 无法读取: {e}") from e
            if available < entry.frame_count:
                raise ConfigurationError(
                    f"序列 {entry.name} 只有 {available} 帧，清单声明 {entry.frame_count} 帧"
                )

    logger.info(
        "📋 已加载清单 %s: %d 个 codec, %d 个序列, 配置 %s",
        manifest.name,
        len(manifest.codecs),
        len(manifest.sequences),
        ",".join(c.value for c in manifest.configs),
    )
    return manifest


# ==================== 任务规划 ====================


def _rung_input_path(manifest: RunManifest, entry: SequenceEntry, resolution: Resolution) -> Path:
    suffix = entry.path.suffix or ".yuv"
    return manifest.output_dir / "inputs" / f"{entry.name}_{resolution[0]}x{resolution[1]}{suffix}"


def _plan_job(
    manifest: RunManifest,
    codec: str,
    templates: CodecTemplates,
    config: CodingConfig,
    entry: SequenceEntry,
    info: SequenceInfo,
    resolution: Resolution,
    qp: int,
    frames: int,
) -> JobSpec:
    width, height = resolution
    is_rung = resolution != info.resolution
    suffix = entry.path.suffix or ".yuv"
    stem = f"{entry.name}_{width}x{height}_q{qp:03d}"
    job_dir = manifest.output_dir / codec / config.value / entry.name

    input_path = _rung_input_path(manifest, entry, resolution) if is_rung else entry.path
    bitstream = job_dir / f"{stem}.obu"
    decoded = job_dir / f"{stem}.dec{suffix}" if templates.decode else None
    upsampled = job_dir / f"{stem}.up{suffix}" if decoded is not None and is_rung else None
    log = job_dir / f"{stem}.json" if decoded is not None else None

    variables: dict[str, Any] = {
        "sequence": entry.name,
        "config": config.value,
        "qp": qp,
        "width": width,
        "height": height,
        "frames": frames,
        "tiles": templates.tiles_for(entry.class_label),
        "fps_num": info.fps_num,
        "fps_denom": info.fps_denom,
        "bitdepth": info.bit_depth,
        "chroma": info.chroma.value,
        "source": str(entry.path),
        "source_width": info.width,
        "source_height": info.height,
        "bitstream": str(bitstream),
        "decoded": str(decoded) if decoded else "",
        "log": str(log) if log else "",
    }

    encode_argv = render_argv(
        templates.encode, {**variables, "input": str(input_path), "output": str(partial_path(bitstream))}
    )
    decode_argv = None
    if templates.decode and decoded is not None:
        decode_argv = render_argv(
            templates.decode, {**variables, "input": str(bitstream), "output": str(partial_path(decoded))}
        )
    metric_argv = None
    if templates.metric and log is not None:
        metric_argv = render_argv(
            templates.metric,
            {
                **variables,
                "ref": str(entry.path),
                "dist": str(upsampled or decoded),
                "output": str(partial_path(log)),
                # 指标总是在源分辨率上计算
                "width": info.width,
                "height": info.height,
            },
        )

    try:
        return JobSpec(
            job_id=f"{codec}/{config.value}/{entry.name}/{width}x{height}/q{qp:03d}",
            codec=codec,
            sequence=entry.name,
            class_label=entry.class_label,
            config=config,
            qp=qp,
            resolution=resolution,
            source_resolution=info.resolution,
            frames=frames,
            tiles=variables["tiles"],
            bit_depth=info.bit_depth,
            chroma=info.chroma,
            siting=info.siting,
            fps_num=info.fps_num,
            fps_denom=info.fps_denom,
            input_path=input_path,
            source_path=entry.path,
            encode_argv=encode_argv,
            decode_argv=decode_argv,
            metric_argv=metric_argv,
            bitstream_path=bitstream,
            decoded_path=decoded,
            upsampled_path=upsampled,
            log_path=log,
        )
    except ValidationError as e:
        raise TemplateError(f"{codec}/{config.value}/{entry.name}: 任务无效: {e}") from e


def plan_jobs(manifest: RunManifest, codec: str | None = None) -> list[JobSpec]:
    """展开清单中的全部任务，顺序确定：codec → 配置 → 序列 → 分辨率（源在前）→ QP

    Raises:
        ConfigurationError: codec 不存在、AS 缺少分辨率阶梯、类别不支持该配置
        TemplateError: 渲染后仍有未解析的占位符
    """
    if codec is not None and codec not in manifest.codecs:
        raise ConfigurationError(f"清单中没有 codec {codec}，可用: {', '.join(manifest.codecs)}")
    codecs = [(codec, manifest.codecs[codec])] if codec else list(manifest.codecs.items())
    ladders = manifest.ladder_overrides()

    jobs: list[JobSpec] = []
    for codec_name, templates in codecs:
        for config in manifest.configs:
            qps = manifest.qp_overrides.get(config) or qp_set_for(config)
            for entry in manifest.sequences:
                info = entry.to_info()
                frames = frame_count_for(config, info.class_label, info.is_ecf)
                if entry.frame_count < frames:
                    logger.debug("%s 只有 %d 帧，少于 CTC 要求的 %d 帧", entry.name, entry.frame_count, frames)
                    frames = entry.frame_count
                resolutions = [info.resolution]
                if config is CodingConfig.ADAPTIVE_STREAMING:
                    resolutions += as_ladder_for(info.width, info.height, ladders)
                for resolution in resolutions:
                    for qp in qps.qps:
                        jobs.append(
                            _plan_job(manifest, codec_name, templates, config, entry, info, resolution, qp, frames)
                        )

    logger.info("🗂️ 规划了 %d 个任务", len(jobs))
    return jobs


def format_dry_run(jobs: Iterable[JobSpec]) -> str:
    """任务列表 → 命令清单文本（同样的任务得到同样的文本）"""
    lines: list[str] = []
    for job in jobs:
        lines.append(f"# {job.job_id}")
        lines.append(f"encode: {format_argv(job.encode_argv)}")
        if job.decode_argv:
            lines.append(f"decode: {format_argv(job.decode_argv)}")
        if job.upsampled_path is not None:
            w, h = job.source_resolution
            lines.append(f"upsample: {job.decoded_path} -> {job.upsampled_path} ({w}x{h})")
        if job.metric_argv:
            lines.append(f"metric: {format_argv(job.metric_argv)}")
        elif job.log_path is not None:
            lines.append(f"psnr: {job.log_path}")
    return "\n".join(lines) + ("\n" if lines else "")


# ==================== 视频阶段（进程内） ====================


def _source_info(job: JobSpec, resolution: Resolution | None = None) -> SequenceInfo:
    width, height = resolution or job.source_resolution
    return SequenceInfo(
        name=job.sequence,
        class_label=job.class_label,
        width=width,
        height=height,
        bit_depth=job.bit_depth,  # type: ignore[arg-type]
        chroma=job.chroma,
        fps_num=job.fps_num,
        fps_denom=job.fps_denom,
        siting=job.siting,
    )


def _rescale(src: Path, dst: Path, info: SequenceInfo, target: Resolution, frames: int, fps: Fraction) -> int:
    stream = (resample_frame(f, *target) for f in read_raw_video(src, info, max_frames=frames))
    return write_raw_video(dst, stream, fps=fps)


def prepare_inputs(jobs: Sequence[JobSpec], force: bool = False) -> list[Path]:
    """为 AS 阶梯生成下采样输入，返回新写出的文件"""
    needed: dict[Path, JobSpec] = {}
    for job in jobs:
        if job.input_path == job.source_path:
            continue
        current = needed.get(job.input_path)
        if current is None or job.frames > current.frames:
            needed[job.input_path] = job

    written: list[Path] = []
    for path, job in sorted(needed.items()):
        if path.is_file() and path.stat().st_size > 0 and not force:
            logger.info("⏭️ 下采样输入已存在: %s", path.name)
            continue
        count = _rescale(
            job.source_path,
            path,
            _source_info(job),
            job.resolution,
            job.frames,
            Fraction(job.fps_num, job.fps_denom),
        )
        logger.info("📐 下采样 %s → %dx%d: %d 帧", job.sequence, *job.resolution, count)
        written.append(path)
    return written


def upsample_decoded(job: JobSpec) -> int:
    """把 AS 阶梯的解码结果上采样回源分辨率"""
    if job.decoded_path is None or job.upsampled_path is None:
        raise ArgumentError(f"{job.job_id}: 没有需要上采样的解码输出")
    return _rescale(
        job.decoded_path,
        job.upsampled_path,
        _source_info(job, job.resolution),
        job.source_resolution,
        job.frames,
        Fraction(job.fps_num, job.fps_denom),
    )


def measure_psnr(job: JobSpec) -> Path:
    """没有外部 metric 模板时，在进程内计算 PSNR 并写出 JSON 指标日志"""
    dist = job.upsampled_path or job.decoded_path
    if dist is None or job.log_path is None:
        raise ArgumentError(f"{job.job_id}: 没有解码输出，无法计算 PSNR")
    info = _source_info(job)
    per_frame = psnr_frames(
        read_raw_video(job.source_path, info, max_frames=job.frames),
        read_raw_video(dist, info, max_frames=job.frames),
    )

    names = {"psnr_y": [t.y_db for t in per_frame]}
    if job.chroma.has_chroma:
        names["psnr_cb"] = [t.u_db for t in per_frame]  # type: ignore[misc]
        names["psnr_cr"] = [t.v_db for t in per_frame]  # type: ignore[misc]
    payload = {
        "frames": [
            {"frameNum": i, "metrics": {name: values[i] for name, values in names.items()}}
            for i in range(len(per_frame))
        ],
        "pooled_metrics": {name: {"mean": math.fsum(values) / len(values)} for name, values in names.items()},
    }
    atomic_write_text(job.log_path, json.dumps(payload, indent=2) + "\n")
    return job.log_path


# ==================== 执行 ====================


def _outputs_valid(job: JobSpec) -> bool:
    paths = [job.bitstream_path, job.decoded_path, job.upsampled_path, job.log_path]
    return all(p.is_file() and p.stat().st_size > 0 for p in paths if p is not None)


def _already_done(job: JobSpec, ledger: dict[str, JobStatus] | None) -> bool:
    """有台账时要求最后一次记录为成功；没有台账时只看输出"""
    if ledger is not None and ledger.get(job.job_id) is not JobStatus.SUCCESS:
        return False
    return _outputs_valid(job)


def _stage_log(job: JobSpec, stage: str) -> Path:
    return job.bitstream_path.with_name(f"{job.bitstream_path.stem}.{stage}.log")


def append_ledger(path: Path, result: JobResult) -> None:
    """追加一行台账（制表符分隔）"""
    new_file = not path.exists()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as f:
        if new_file:
            f.write("\t".join(LEDGER_COLUMNS) + "\n")
        f.write(
            "\t".join(
                [
                    result.job_id,
                    result.status.value,
                    "-" if result.exit_code is None else str(result.exit_code),
                    f"{result.wall_time_seconds:.3f}",
                    "-" if result.bitstream_size_bytes is None else str(result.bitstream_size_bytes),
                    str(int(result.skipped)),
                ]
            )
            + "\n"
        )


def read_ledger(path: str | Path) -> dict[str, JobStatus]:
    """读取台账，返回每个任务最后一次记录的状态"""
    statuses: dict[str, JobStatus] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            fields = line.rstrip("\n").split("\t")
            if line_no == 1 and tuple(fields) == LEDGER_COLUMNS:
                continue
            if len(fields) != len(LEDGER_COLUMNS):
                raise ParseError(f"台账第 {line_no} 行列数无效: {line!r}")
            statuses[fields[0]] = JobStatus(fields[1])
    return statuses


async def _run_process(job: JobSpec, stage: str, argv: Sequence[str], stats: RunStatistics) -> int:
    log_path = _stage_log(job, stage)
    log_path.parent.mkdir(parents=True, exist_ok=True)
    with open(log_path, "wb") as out:
        with stats.track_process():
            process = await asyncio.create_subprocess_exec(
                *argv, stdout=out, stderr=asyncio.subprocess.STDOUT
            )
            return await process.wait()


async def _run_job(job: JobSpec, stats: RunStatistics) -> JobResult:
    start = time.perf_counter()
    job.bitstream_path.parent.mkdir(parents=True, exist_ok=True)
    log_paths: list[Path] = []

    def failed(error: str, exit_code: int | None = None) -> JobResult:
        return JobResult(
            job_id=job.job_id,
            status=JobStatus.FAILED,
            exit_code=exit_code,
            wall_time_seconds=time.perf_counter() - start,
            log_paths=tuple(log_paths),
            error=error,
        )

    for stage, argv in job.stages:
        stage_start = time.perf_counter()
        try:
            code = await _run_process(job, stage, argv, stats)
        except OSError as e:
            logger.exception("❌ %s: %s 阶段无法启动", job.job_id, stage)
            return failed(f"{stage} 无法启动: {e}")
        stats.record_stage(job.codec, stage, time.perf_counter() - stage_start)
        log_paths.append(_stage_log(job, stage))
        output = job.stage_output(stage)
        partial = partial_path(output) if output is not None else None
        if code != 0:
            if partial is not None:
                partial.unlink(missing_ok=True)
            logger.error("❌ %s: %s 阶段退出码 %d", job.job_id, stage, code)
            return failed(f"{stage} 退出码 {code}", code)
        if output is not None and partial is not None:
            if not partial.is_file():
                logger.error("❌ %s: %s 阶段没有写出 %s", job.job_id, stage, partial.name)
                return failed(f"{stage} 没有写出输出", code)
            partial.replace(output)

        # 解码之后、外部指标之前插入上采样
        if stage == "decode" and job.upsampled_path is not None:
            try:
                await asyncio.to_thread(upsample_decoded, job)
            except (AvCtcError, OSError) as e:
                logger.exception("❌ %s: 上采样失败", job.job_id)
                return failed(f"upsample 失败: {e}")

    if job.metric_argv is None and job.log_path is not None:
        stage_start = time.perf_counter()
        try:
            await asyncio.to_thread(measure_psnr, job)
        except (AvCtcError, OSError) as e:
            logger.exception("❌ %s: PSNR 计算失败", job.job_id)
            return failed(f"psnr 失败: {e}")
        stats.record_stage(job.codec, "psnr", time.perf_counter() - stage_start)
    if job.log_path is not None:
        log_paths.append(job.log_path)

    size = job.bitstream_path.stat().st_size if job.bitstream_path.is_file() else 0
    if size <= 0:
        logger.error("❌ %s: 码流为空或不存在", job.job_id)
        return failed("码流为空或不存在", 0)

    elapsed = time.perf_counter() - start
    logger.info("✅ %s: %d 字节, %.2fs", job.job_id, size, elapsed)
    return JobResult(
        job_id=job.job_id,
        status=JobStatus.SUCCESS,
        exit_code=0,
        wall_time_seconds=elapsed,
        bitstream_size_bytes=size,
        log_paths=tuple(log_paths),
    )


async def execute_async(
    jobs: Sequence[JobSpec],
    parallelism: int,
    *,
    force: bool = False,
    ledger_path: Path | None = None,
    stats: RunStatistics | None = None,
) -> list[JobResult]:
    """并发执行任务，最多 parallelism 个外部进程同时运行

    结果顺序与 jobs 一致；单个任务失败只记录，不中断整批。

    Raises:
        ArgumentError: parallelism < 1
    """
    if parallelism < 1:
        raise ArgumentError(f"parallelism 必须 ≥ 1: {parallelism}")
    stats = stats or RunStatistics()
    ledger: dict[str, JobStatus] | None = None
    if ledger_path is not None:
        ledger = read_ledger(ledger_path) if ledger_path.is_file() else {}
    semaphore = asyncio.Semaphore(parallelism)
    collector_lock = asyncio.Lock()

    async def record(result: JobResult) -> None:
        async with collector_lock:
            stats.record_job(result.wall_time_seconds, result.ok, skipped=result.skipped)
            if ledger_path is not None:
                append_ledger(ledger_path, result)

    async def run_one(job: JobSpec) -> JobResult:
        if not force and _already_done(job, ledger):
            logger.info("⏭️ 跳过已完成的任务: %s", job.job_id)
            result = JobResult(
                job_id=job.job_id,
                status=JobStatus.SUCCESS,
                exit_code=0,
                bitstream_size_bytes=job.bitstream_path.stat().st_size,
                log_paths=(job.log_path,) if job.log_path else (),
                skipped=True,
            )
        else:
            async with semaphore:
                result = await _run_job(job, stats)
        await record(result)
        return result

    logger.info("🚀 开始执行 %d 个任务（并发 %d）", len(jobs), parallelism)
    results = await asyncio.gather(*(run_one(job) for job in jobs))
    stats.log_summary()
    return list(results)


def execute(
    jobs: Sequence[JobSpec],
    parallelism: int | None = None,
    *,
    force: bool = False,
    ledger_path: Path | None = None,
    stats: RunStatistics | None = None,
) -> list[JobResult]:
    """execute_async 的同步入口"""
    return asyncio.run(
        execute_async(
            jobs,
            parallelism or settings.DEFAULT_PARALLELISM,
            force=force,
            ledger_path=ledger_path,
            stats=stats,
        )
    )


# ==================== 结果收集 ====================


@dataclass
class CollectedRun:
    """collect 的输出：每个 (codec, 曲线) 的 QP → 码率，以及带码率的指标日志"""

    bitrates: dict[tuple[str, CurveKey], dict[int, float]] = field(default_factory=dict)
    logs: dict[tuple[str, CurveKey], list[MetricLog]] = field(default_factory=dict)
    failed: list[str] = field(default_factory=list)

    def codecs(self) -> list[str]:
        return sorted({codec for codec, _ in self.bitrates})

    def logs_for(self, codec: str) -> list[MetricLog]:
        return [log for (c, _), logs in sorted(self.logs.items(), key=_entry_order) if c == codec for log in logs]

    def curves(self, codec: str, manifest: RunManifest) -> dict[CurveKey, dict[MetricId, RDCurve]]:
        """某个 codec 的全部 RD 曲线"""
        result: dict[CurveKey, dict[MetricId, RDCurve]] = {}
        for (c, key), logs in sorted(self.logs.items(), key=_entry_order):
            if c != codec:
                continue
            info = manifest.sequence(key.sequence).to_info()
            curves = curves_from_logs(logs, self.bitrates[(c, key)], info)
            result[key] = {curve.metric_id: curve for curve in curves}
        return result


def _entry_order(item: tuple[tuple[str, CurveKey], Any]) -> tuple[str, str, str, tuple[int, int]]:
    (codec, key), _ = item
    resolution = key.resolution or (0, 0)
    return (codec, key.sequence, key.config.value if key.config else "", (-resolution[0], -resolution[1]))


def collect(results: Iterable[JobResult], manifest: RunManifest) -> CollectedRun:
    """成功任务 → 码率（bitrate_kbps）+ 指标日志

    失败任务（包括码流为 0 字节）只记录在 failed 中；结果与完成顺序无关。

    Raises:
        CollectError: 任务不属于该清单，或成功任务缺少指标日志
    """
    jobs = {job.job_id: job for job in plan_jobs(manifest)}
    collected = CollectedRun()
    bitrates: dict[tuple[str, CurveKey], dict[int, float]] = defaultdict(dict)
    logs: dict[tuple[str, CurveKey], list[MetricLog]] = defaultdict(list)

    for result in sorted(results, key=lambda r: r.job_id):
        job = jobs.get(result.job_id)
        if job is None:
            raise CollectError(f"任务 {result.job_id} 不属于清单 {manifest.name}")
        if not result.ok or not result.bitstream_size_bytes:
            logger.warning("⚠️ 任务 %s 失败，不参与统计: %s", job.job_id, result.error)
            collected.failed.append(job.job_id)
            continue

        key = CurveKey(job.sequence, job.config, job.resolution)
        rate = bitrate_kbps(result.bitstream_size_bytes, job.fps_num, job.fps_denom, job.frames)
        bitrates[(job.codec, key)][job.qp] = rate

        if job.log_path is None:
            continue
        if not job.log_path.is_file():
            raise CollectError(f"任务 {job.job_id} 缺少指标日志: {job.log_path}")
        log = parse_metric_log(
            job.log_path.read_bytes(),
            sequence=job.sequence,
            qp=job.qp,
            config=job.config,
            resolution=job.resolution,
            ciede2000_higher_is_better=manifest.ciede2000_higher_is_better,
        )
        logs[(job.codec, key)].append(log.model_copy(update={"bitrate_kbps": rate}))

    collected.bitrates = dict(bitrates)
    collected.logs = dict(logs)
    logger.info(
        "📥 收集完成: %d 条曲线, %d 个失败任务", len(collected.bitrates), len(collected.failed)
    )
    return collected
