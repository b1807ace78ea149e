"""外部指标日志解析

支持两种输入：
1. 指标工具的 JSON 日志（libvmaf 输出格式的子集）：
   {"frames": [{"frameNum": 0, "metrics": {"vmaf": 93.1, ...}}, ...],
    "pooled_metrics": {"vmaf": {"mean": 93.1, ...}, ...}}
2. 工具包自己的 CSV 方言：sequence,config,resolution,qp,bitrate_kbps,metric,value

指标名通过固定别名表映射到 MetricId，未知指标告警后跳过。
"""

import csv
import io
import json
import logging
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from avctc.config.settings import settings
from avctc.exceptions import ArgumentError, CurveError, ParseError
from avctc.models.metric_log import CurveKey, MetricLog
from avctc.models.rd import MetricId, RDCurve, RDPoint
from avctc.models.sequence import ChromaFormat, CodingConfig, SequenceInfo
from avctc.services.metrics import format_kbps, weighted_psnr

logger = logging.getLogger(__name__)

RD_CSV_COLUMNS = ("sequence", "config", "resolution", "qp", "bitrate_kbps", "metric", "value")

# 指标别名表（小写）
METRIC_ALIASES: dict[str, MetricId] = {
    "psnr_y": MetricId.PSNR_Y,
    "psnr_u": MetricId.PSNR_U,
    "psnr_cb": MetricId.PSNR_U,
    "psnr_v": MetricId.PSNR_V,
    "psnr_cr": MetricId.PSNR_V,
    "psnr_yuv": MetricId.PSNR_YUV,
    "ssim": MetricId.SSIM,
    "float_ssim": MetricId.SSIM,
    "ms_ssim": MetricId.MS_SSIM,
    "float_ms_ssim": MetricId.MS_SSIM,
    "vmaf": MetricId.VMAF,
    "ciede2000": MetricId.CIEDE2000,
    "psnr_hvs": MetricId.PSNR_HVS,
    "cambi": MetricId.CAMBI,
}


def metric_from_name(name: str) -> MetricId | None:
    """指标名 → MetricId，未知返回 None"""
    key = name.strip().lower().replace("-", "_")
    return METRIC_ALIASES.get(key)


# ========== JSON 日志 ==========


class _LogFrame(BaseModel):
    model_config = ConfigDict(extra="ignore", populate_by_name=True)

    frame_num: int = Field(..., alias="frameNum", ge=0)
    metrics: dict[str, float]


class _PooledStat(BaseModel):
    model_config = ConfigDict(extra="ignore")

    mean: float


class _JsonMetricLog(BaseModel):
    """日志中本工具关心的字段，其余字段忽略"""

    model_config = ConfigDict(extra="ignore")

    frames: list[_LogFrame] = Field(default_factory=list)
    pooled_metrics: dict[str, _PooledStat] | None = None
    sequence: str | None = None
    qp: int | None = None
    config: CodingConfig | None = None


def _orient(metric: MetricId, value: float, ciede2000_higher_is_better: bool) -> float:
    if metric is MetricId.CIEDE2000 and not ciede2000_higher_is_better:
        return -value
    return value


def _parse_json_log(
    payload: Any,
    *,
    sequence: str | None,
    qp: int | None,
    config: CodingConfig | None,
    resolution: tuple[int, int] | None,
    ciede2000_higher_is_better: bool,
) -> MetricLog:
    try:
        raw = _JsonMetricLog.model_validate(payload)
    except ValidationError as e:
        raise ParseError(f"指标日志格式错误: {e}") from e

    name = sequence or raw.sequence
    if not name:
        raise ParseError("指标日志缺少序列名（参数或 sequence 字段）")

    ordered = sorted(raw.frames, key=lambda f: f.frame_num)
    if [f.frame_num for f in ordered] != list(range(len(ordered))):
        raise ParseError(f"{name}: 帧号必须从 0 开始连续")

    unknown: set[str] = set()
    frames: list[dict[MetricId, float]] = []
    for frame in ordered:
        record: dict[MetricId, float] = {}
        for key, value in frame.metrics.items():
            metric = metric_from_name(key)
            if metric is None:
                unknown.add(key)
                continue
            record[metric] = _orient(metric, value, ciede2000_higher_is_better)
        frames.append(record)

    pooled: dict[MetricId, float] = {}
    for key, stat in (raw.pooled_metrics or {}).items():
        metric = metric_from_name(key)
        if metric is None:
            unknown.add(key)
            continue
        pooled[metric] = _orient(metric, stat.mean, ciede2000_higher_is_better)

    if unknown:
        logger.warning("⚠️ %s: 跳过未知指标 %s", name, ", ".join(sorted(unknown)))

    framed = sorted({m for record in frames for m in record}, key=list(MetricId).index)
    for metric in framed:
        if metric in pooled:
            continue
        values = [record[metric] for record in frames if metric in record]
        pooled[metric] = math.fsum(values) / len(values)
        logger.warning("⚠️ %s: 缺少 %s 池化值，按逐帧均值重算", name, metric.value)

    return MetricLog(
        sequence=name,
        qp=qp if qp is not None else raw.qp,
        config=config or raw.config,
        resolution=resolution,
        frames=tuple(frames),
        pooled=pooled,
    )


# ========== CSV 方言 ==========


def parse_resolution(text: str) -> tuple[int, int] | None:
    text = text.strip()
    if not text:
        return None
    try:
        w, h = text.lower().split("x")
        return (int(w), int(h))
    except ValueError as e:
        raise ParseError(f"分辨率格式错误（应为 WxH）: {text}") from e


def format_resolution(resolution: tuple[int, int] | None) -> str:
    return "" if resolution is None else f"{resolution[0]}x{resolution[1]}"


def _parse_csv_logs(text: str) -> list[MetricLog]:
    # CSV 方言里的值已经是越大越好的方向，不再翻转
    reader = csv.DictReader(io.StringIO(text))
    missing = set(RD_CSV_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ParseError(f"RD CSV 缺少列: {', '.join(sorted(missing))}")

    groups: dict[tuple[CurveKey, int], dict[str, Any]] = {}
    for line_no, row in enumerate(reader, start=2):
        try:
            config_text = (row["config"] or "").strip()
            key = CurveKey(
                row["sequence"].strip(),
                CodingConfig(config_text) if config_text else None,
                parse_resolution(row["resolution"] or ""),
            )
            qp = int(row["qp"])
            bitrate = float(row["bitrate_kbps"])
            value = float(row["value"])
        except (ValueError, TypeError, AttributeError) as e:
            raise ParseError(f"RD CSV 第 {line_no} 行格式错误: {e}") from e
        if not key.sequence:
            raise ParseError(f"RD CSV 第 {line_no} 行缺少序列名")

        metric_name = (row["metric"] or "").strip()
        metric = metric_from_name(metric_name)
        if metric is None:
            logger.warning("⚠️ RD CSV 第 %d 行: 跳过未知指标 %s", line_no, metric_name)
            continue

        group = groups.setdefault((key, qp), {"bitrate": bitrate, "pooled": {}})
        if group["bitrate"] != bitrate:
            raise ParseError(f"{key.sequence} QP {qp}: 同一编码点的码率不一致")
        if metric in group["pooled"]:
            raise ParseError(f"{key.sequence} QP {qp}: 指标 {metric.value} 重复")
        group["pooled"][metric] = value

    try:
        return [
            MetricLog(
                sequence=key.sequence,
                qp=qp,
                config=key.config,
                resolution=key.resolution,
                bitrate_kbps=group["bitrate"],
                pooled=group["pooled"],
            )
            for (key, qp), group in groups.items()
        ]
    except ValidationError as e:
        raise ParseError(f"RD CSV 内容无效: {e}") from e


# ========== 入口 ==========


def parse_metric_logs(
    data: bytes | str,
    *,
    sequence: str | None = None,
    qp: int | None = None,
    config: CodingConfig | None = None,
    resolution: tuple[int, int] | None = None,
    ciede2000_higher_is_better: bool | None = None,
) -> list[MetricLog]:
    """解析 JSON 日志或 CSV 方言，返回一个或多个 MetricLog

    Raises:
        ParseError: 记录格式错误
    """
    if ciede2000_higher_is_better is None:
        ciede2000_higher_is_better = settings.CIEDE2000_HIGHER_IS_BETTER
    text = data.decode("utf-8-sig") if isinstance(data, bytes) else data

    if text.lstrip().startswith("{"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"指标日志不是有效的 JSON: {e}") from e
        return [
            _parse_json_log(
                payload,
                sequence=sequence,
                qp=qp,
                config=config,
                resolution=resolution,
                ciede2000_higher_is_better=ciede2000_higher_is_better,
            )
        ]
    return _parse_csv_logs(text)


def parse_metric_log(data: bytes | str, **kwargs: Any) -> MetricLog:
    """解析单个指标日志（输入必须恰好对应一次编码）"""
    logs = parse_metric_logs(data, **kwargs)
    if len(logs) != 1:
        raise ParseError(f"期望 1 条指标日志，实际 {len(logs)} 条")
    return logs[0]


def load_metric_logs(path: str | Path, **kwargs: Any) -> list[MetricLog]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ParseError(f"无法读取指标日志 {path}: {e}") from e
    return parse_metric_logs(data, **kwargs)


# ========== RD 曲线 ==========


def _with_psnr_yuv(pooled: dict[MetricId, float], chroma: ChromaFormat) -> dict[MetricId, float]:
    """有 Y/U/V 但没有 YUV 时按色度格式权重推导"""
    if MetricId.PSNR_YUV in pooled or MetricId.PSNR_Y not in pooled:
        return pooled
    if not chroma.has_chroma:
        return {**pooled, MetricId.PSNR_YUV: pooled[MetricId.PSNR_Y]}
    if MetricId.PSNR_U not in pooled or MetricId.PSNR_V not in pooled:
        return pooled
    derived = weighted_psnr(
        pooled[MetricId.PSNR_Y], pooled[MetricId.PSNR_U], pooled[MetricId.PSNR_V], chroma
    )
    return {**pooled, MetricId.PSNR_YUV: derived}


def curves_from_logs(
    logs: Iterable[MetricLog],
    bitrates: Mapping[int, float] | None = None,
    info: SequenceInfo | None = None,
    *,
    expected_points: int | None = None,
) -> list[RDCurve]:
    """同一 (序列, 配置, 分辨率) 的日志 → 每个指标一条 RD 曲线

    Args:
        logs: 各 QP 的指标日志
        bitrates: QP → kbps；为 None 时使用日志自带码率（CSV 方言）
        info: 序列信息，用于推导 PSNR_YUV 的权重
        expected_points: 期望的 QP 个数（CTC 为 6）

    Raises:
        ArgumentError: QP 缺失/重复、缺少码率、日志身份不一致
        CurveError: 某指标不足 2 个点
    """
    logs = sorted(logs, key=lambda log: (log.qp is None, log.qp))
    if not logs:
        raise ArgumentError("没有指标日志")
    keys = {log.key for log in logs}
    if len(keys) != 1:
        raise ArgumentError(f"日志属于不同的曲线: {sorted(str(k) for k in keys)}")
    key = keys.pop()

    qps = [log.qp for log in logs]
    if None in qps:
        raise ArgumentError(f"{key.sequence}: 指标日志缺少 QP")
    duplicates = sorted({q for q in qps if qps.count(q) > 1})
    if duplicates:
        raise ArgumentError(f"{key.sequence}: QP 重复 {duplicates}")
    if expected_points is not None and len(logs) != expected_points:
        raise ArgumentError(
            f"{key.sequence}: 期望 {expected_points} 个 QP，实际 {len(logs)} 个"
        )

    chroma = info.chroma if info is not None else ChromaFormat.CF420
    points: dict[MetricId, list[RDPoint]] = defaultdict(list)
    for log in logs:
        assert log.qp is not None
        rate = bitrates.get(log.qp) if bitrates is not None else log.bitrate_kbps
        if rate is None:
            raise ArgumentError(f"{key.sequence}: 缺少 QP {log.qp} 的码率")
        rate = float(format_kbps(rate))
        for metric, value in _with_psnr_yuv(dict(log.pooled), chroma).items():
            points[metric].append(
                RDPoint(qp=log.qp, bitrate_kbps=rate, quality=value, metric_id=metric)
            )

    resolution = key.resolution or (info.resolution if info is not None else None)
    config = key.config or CodingConfig.RANDOM_ACCESS
    curves: list[RDCurve] = []
    for metric in sorted(points, key=list(MetricId).index):
        metric_points = points[metric]
        if len(metric_points) != len(logs):
            logger.warning(
                "⚠️ %s/%s: 只有 %d/%d 个 QP 有值", key.sequence, metric.value, len(metric_points), len(logs)
            )
        if len(metric_points) < 2:
            raise CurveError(f"{key.sequence}/{metric.value}: RD 曲线至少需要 2 个点")
        curves.append(
            RDCurve.from_points(
                key.sequence, config, metric, metric_points, info=info, resolution=resolution
            )
        )
    return curves


def curves_by_key(
    logs: Iterable[MetricLog],
    infos: Mapping[str, SequenceInfo] | None = None,
) -> dict[CurveKey, dict[MetricId, RDCurve]]:
    """按 (序列, 配置, 分辨率) 分组后构造曲线；码率取自日志本身"""
    grouped: dict[CurveKey, list[MetricLog]] = defaultdict(list)
    for log in logs:
        grouped[log.key].append(log)

    result: dict[CurveKey, dict[MetricId, RDCurve]] = {}
    for key in sorted(grouped, key=_key_order):
        info = (infos or {}).get(key.sequence)
        curves = curves_from_logs(grouped[key], info=info)
        result[key] = {c.metric_id: c for c in curves}
    return result


def _key_order(key: CurveKey) -> tuple[str, str, tuple[int, int]]:
    config = key.config.value if key.config else ""
    resolution = key.resolution or (0, 0)
    return (key.sequence, config, (-resolution[0], -resolution[1]))


# ========== CSV 输出 ==========


def _write_rd_rows(rows: Iterable[tuple[Any, ...]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(RD_CSV_COLUMNS)
    writer.writerows(rows)
    return buffer.getvalue()


def emit_rd_csv(curves: Iterable[RDCurve]) -> str:
    """RD 曲线导出为 CSV 方言（只导出带 QP 的实测点）"""
    rows = []
    for curve in sorted(
        curves,
        key=lambda c: (*_key_order(CurveKey(c.sequence, c.config, c.resolution)), list(MetricId).index(c.metric_id)),
    ):
        for p in curve.points:
            if p.qp is None:
                continue
            rows.append(
                (
                    curve.sequence,
                    curve.config.value,
                    format_resolution(curve.resolution),
                    p.qp,
                    format_kbps(p.bitrate_kbps),
                    curve.metric_id.value,
                    repr(p.quality),
                )
            )
    return _write_rd_rows(rows)


def emit_metric_logs_csv(logs: Iterable[MetricLog]) -> str:
    """带码率的指标日志导出为 CSV 方言"""
    rows = []
    for log in sorted(logs, key=lambda lg: (*_key_order(lg.key), lg.qp if lg.qp is not None else -1)):
        if log.bitrate_kbps is None or log.qp is None:
            raise ArgumentError(f"{log.sequence}: 导出 CSV 需要 QP 和码率")
        for metric in log.metrics:
            rows.append(
                (
                    log.sequence,
                    log.config.value if log.config else "",
                    format_resolution(log.resolution),
                    log.qp,
                    format_kbps(log.bitrate_kbps),
                    metric.value,
                    repr(log.pooled[metric]),
                )
            )
    return _write_rd_rows(rows)
