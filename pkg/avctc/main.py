"""avctc 命令行入口

子命令：bdrate, hull, psnr, resample, run, report, progress。
退出码：0 成功，1 运行失败，2 解析/用法错误，3 质量区间不重叠，4 可用点不足。
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path

from avctc.config.settings import settings
from avctc.exceptions import ArgumentError, AvCtcError, ExitCode, ParseError
from avctc.models.metric_log import CurveKey
from avctc.models.rd import MetricId, RDCurve
from avctc.models.report import BdRateRow, QualityRange
from avctc.models.sequence import ChromaFormat, ChromaSiting, CodingConfig, SequenceInfo
from avctc.services.hull import build_hull, densify_union, emit_hull_csv, group_resolutions, hull_bd_rate
from avctc.services.ingest import curves_by_key, emit_metric_logs_csv, load_metric_logs, metric_from_name, parse_resolution
from avctc.services.metrics import pool_psnr, psnr_frames
from avctc.services.report import (
    ReportFormat,
    build_report,
    compare_curve_sets,
    emit_bdrate_rows,
    emit_progress_series,
    emit_report,
    parse_report_csv,
)
from avctc.services.resampler import build_filter_bank, emit_filter_bank_csv, resample_frame
from avctc.services.runner import collect, execute, format_dry_run, load_manifest, plan_jobs, prepare_inputs
from avctc.services.video_io import info_from_y4m, is_y4m, read_raw_video, write_raw_video
from avctc.utils.file_io import atomic_write_bytes
from avctc.utils.run_stats import RunStatistics

logger = logging.getLogger(__name__)

CurveSets = dict[CurveKey, dict[MetricId, RDCurve]]


# ==================== 公共工具 ====================


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level.upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def _write_output(data: bytes, output: Path | None) -> None:
    """有 --output 时原子写文件，否则写到标准输出"""
    if output is not None:
        atomic_write_bytes(output, data)
        logger.info("💾 已写出 %s", output)
    else:
        sys.stdout.write(data.decode("utf-8"))
        sys.stdout.flush()


def _metric_arg(text: str) -> MetricId:
    metric = metric_from_name(text)
    if metric is None:
        raise argparse.ArgumentTypeError(f"未知指标: {text}（可用: {', '.join(m.value for m in MetricId)}）")
    return metric


def _resolution_arg(text: str) -> tuple[int, int]:
    try:
        resolution = parse_resolution(text)
    except ParseError as e:
        raise argparse.ArgumentTypeError(str(e)) from e
    if resolution is None or resolution[0] <= 0 or resolution[1] <= 0:
        raise argparse.ArgumentTypeError(f"分辨率必须为正的 WxH: {text}")
    return resolution


def _entry_arg(text: str) -> tuple[str, Path]:
    version, sep, path = text.partition("=")
    if not sep or not version or not path:
        raise argparse.ArgumentTypeError(f"应为 VERSION=REPORT_CSV: {text}")
    return version, Path(path)


def _load_curves(path: Path, infos: dict[str, SequenceInfo] | None = None) -> CurveSets:
    return curves_by_key(load_metric_logs(path), infos)


def _manifest_infos(manifest_path: Path | None) -> dict[str, SequenceInfo] | None:
    if manifest_path is None:
        return None
    manifest = load_manifest(manifest_path, check_files=False)
    return {s.name: s.to_info() for s in manifest.sequences}


def _video_info(path: Path, args: argparse.Namespace) -> SequenceInfo:
    """Y4M 从文件头取几何信息，raw 文件需要 --width/--height"""
    if is_y4m(path):
        info = info_from_y4m(path)
        if args.siting is not None:
            info = info.model_copy(update={"siting": args.siting})
        return info
    if args.width is None or args.height is None:
        raise ArgumentError(f"{path.name} 不是 Y4M，需要指定 --width 和 --height")
    return SequenceInfo(
        name=path.stem,
        class_label="RAW",
        width=args.width,
        height=args.height,
        bit_depth=args.bit_depth,
        chroma=args.chroma,
        fps_num=args.fps.numerator,
        fps_denom=args.fps.denominator,
        siting=args.siting,
    )


def _add_video_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--width", type=int, help="raw 输入的宽度（Y4M 从文件头读取）")
    parser.add_argument("--height", type=int, help="raw 输入的高度（Y4M 从文件头读取）")
    parser.add_argument("--bit-depth", type=int, choices=(8, 10), default=8, help="raw 输入的位深（默认 8）")
    parser.add_argument(
        "--chroma",
        type=ChromaFormat,
        choices=[c.value for c in ChromaFormat],
        default=ChromaFormat.CF420,
        help="raw 输入的色度格式（默认 420）",
    )
    parser.add_argument(
        "--siting",
        type=ChromaSiting,
        choices=[c.value for c in ChromaSiting],
        default=None,
        help="色度采样位置（默认按内容类型推导，非 HDR 视频为 type0）",
    )
    parser.add_argument("--fps", type=Fraction, default=Fraction(30), help="帧率，如 30 或 60000/1001（默认 30）")


def _add_format_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        type=ReportFormat,
        choices=[c.value for c in ReportFormat],
        default=ReportFormat.MARKDOWN,
        help="输出格式（默认 markdown）",
    )
    parser.add_argument("--output", type=Path, help="输出文件（默认标准输出）")


# ==================== 子命令 ====================


def cmd_bdrate(args: argparse.Namespace) -> int:
    infos = _manifest_infos(args.manifest)
    anchor = _load_curves(args.anchor, infos)
    test = _load_curves(args.test, infos)
    ranges = args.range or list(QualityRange)
    rows = compare_curve_sets(anchor, test, args.metric, ranges)
    _write_output(emit_bdrate_rows(rows, args.format, ranges), args.output)
    return ExitCode.OK


def cmd_hull(args: argparse.Namespace) -> int:
    anchor = _load_curves(args.anchor)
    test = _load_curves(args.test) if args.test else None
    anchor_groups = group_resolutions(anchor, args.metric)
    if not anchor_groups:
        raise ArgumentError(f"锚点数据中没有 {args.metric.value} 的 AS 曲线")

    chunks: list[str] = []
    rows: list[BdRateRow] = []
    test_groups = group_resolutions(test, args.metric) if test is not None else {}
    for index, (sequence, curves) in enumerate(sorted(anchor_groups.items())):
        hull = build_hull(curves)
        chunks.append(emit_hull_csv(densify_union(curves), hull, header=index == 0))
        if test is None:
            continue
        if sequence not in test_groups:
            raise ArgumentError(f"测试数据缺少 {sequence} 的 AS 曲线")
        test_hull = build_hull(test_groups[sequence])
        rows.append(
            BdRateRow(
                sequence=sequence,
                config=CodingConfig.ADAPTIVE_STREAMING,
                metric=args.metric.value,
                values={r: hull_bd_rate(hull, test_hull, r).value for r in args.range},
            )
        )

    hull_csv = "".join(chunks).encode("utf-8")
    if test is None:
        _write_output(hull_csv, args.hull_csv or args.output)
        return ExitCode.OK
    if args.hull_csv is not None:
        atomic_write_bytes(args.hull_csv, hull_csv)
    _write_output(emit_bdrate_rows(rows, args.format, args.range), args.output)
    return ExitCode.OK


def cmd_psnr(args: argparse.Namespace) -> int:
    ref_info = _video_info(args.ref, args)
    dist_info = _video_info(args.dist, args)
    per_frame = psnr_frames(
        read_raw_video(args.ref, ref_info, max_frames=args.frames),
        read_raw_video(args.dist, dist_info, max_frames=args.frames),
    )
    if not per_frame:
        raise ArgumentError("输入视频没有任何帧")
    pooled = pool_psnr(per_frame, ref_info.chroma)

    def fmt(value: float | None) -> str:
        return "" if value is None else f"{value:.6f}"

    lines = ["frame,psnr_y,psnr_u,psnr_v,psnr_yuv"]
    for index, triple in enumerate(per_frame):
        lines.append(
            f"{index},{fmt(triple.y_db)},{fmt(triple.u_db)},{fmt(triple.v_db)},{fmt(triple.weighted_db)}"
        )
    lines.append(f"mean,{fmt(pooled.y_db)},{fmt(pooled.u_db)},{fmt(pooled.v_db)},{fmt(pooled.weighted_db)}")
    _write_output(("\n".join(lines) + "\n").encode("utf-8"), args.output)
    return ExitCode.OK


def cmd_resample(args: argparse.Namespace) -> int:
    info = _video_info(args.input, args)
    width, height = args.to
    frames = (resample_frame(f, width, height) for f in read_raw_video(args.input, info, max_frames=args.frames))
    count = write_raw_video(args.output, frames, fps=info.fps)
    logger.info("📐 %dx%d → %dx%d: %d 帧", info.width, info.height, width, height, count)

    if args.filter_csv is not None:
        bank = build_filter_bank(Fraction(info.width, width))
        atomic_write_bytes(args.filter_csv, emit_filter_bank_csv(bank).encode("utf-8"))
    return ExitCode.OK


def cmd_run(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest, check_files=not args.dry_run)
    jobs = plan_jobs(manifest, args.codec)
    if args.dry_run:
        _write_output(format_dry_run(jobs).encode("utf-8"), None)
        return ExitCode.OK

    prepare_inputs(jobs, force=args.force)
    stats = RunStatistics()
    results = execute(
        jobs,
        args.parallelism or manifest.parallelism,
        force=args.force,
        ledger_path=manifest.output_dir / settings.LEDGER_FILENAME,
        stats=stats,
    )
    collected = collect(results, manifest)

    codecs = collected.codecs()
    for codec in codecs:
        logs = collected.logs_for(codec)
        if not logs:
            logger.warning("⚠️ %s 没有指标日志，未写出结果 CSV", codec)
            continue
        atomic_write_bytes(manifest.output_dir / f"results_{codec}.csv", emit_metric_logs_csv(logs).encode("utf-8"))
    for codec in codecs[1:]:
        ratio = stats.time_ratio(codec, codecs[0])
        if ratio is not None:
            logger.info("⏱️ 编码耗时比 %s / %s = %.3f", codec, codecs[0], ratio)

    return ExitCode.FAILURE if collected.failed else ExitCode.OK


def cmd_report(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest, check_files=False)
    infos = {s.name: s.to_info() for s in manifest.sequences}
    classes = {s.name: s.class_label for s in manifest.sequences}
    table = build_report(_load_curves(args.anchor, infos), _load_curves(args.test, infos), classes)
    _write_output(emit_report(table, args.format), args.output)
    return ExitCode.OK


def cmd_progress(args: argparse.Namespace) -> int:
    history = []
    for version, path in args.entry:
        try:
            data = path.read_bytes()
        except OSError as e:
            raise ParseError(f"无法读取报表 {path}: {e}") from e
        history.append((version, parse_report_csv(data)))
    _write_output(emit_progress_series(history).encode("utf-8"), args.output)
    return ExitCode.OK


# ==================== 参数解析 ====================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avctc", description="AV2 CTC evaluation toolkit.")
    parser.add_argument(
        "--log-level",
        default=settings.LOG_LEVEL,
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        type=str.upper,
        help="日志级别（默认取 LOG_LEVEL 环境变量）",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("bdrate", help="两组 RD 数据之间的逐序列 BD-rate")
    p.add_argument("--anchor", type=Path, required=True, help="锚点 RD CSV 或指标日志")
    p.add_argument("--test", type=Path, required=True, help="测试 RD CSV 或指标日志")
    p.add_argument("--metric", type=_metric_arg, action="append", help="只计算这些指标（可重复，默认全部）")
    p.add_argument(
        "--range",
        type=QualityRange,
        choices=[c.value for c in QualityRange],
        action="append",
        help="质量区间（可重复，默认 full/low/mid/high）",
    )
    p.add_argument("--manifest", type=Path, help="运行清单，用于推导 PSNR_YUV 的色度权重")
    _add_format_flags(p)
    p.set_defaults(handler=cmd_bdrate)

    p = sub.add_parser("hull", help="AS 多分辨率凸包与凸包 BD-rate")
    p.add_argument("--anchor", type=Path, required=True, help="锚点各分辨率的 RD CSV")
    p.add_argument("--test", type=Path, help="测试各分辨率的 RD CSV；给出时输出凸包 BD-rate")
    p.add_argument("--metric", type=_metric_arg, default=MetricId.PSNR_YUV, help="凸包使用的指标（默认 PSNR_YUV）")
    p.add_argument("--hull-csv", type=Path, help="凸包绘图数据输出文件")
    p.add_argument(
        "--range",
        type=QualityRange,
        choices=[c.value for c in QualityRange],
        action="append",
        help="凸包 BD-rate 的质量区间（可重复，默认 full）",
    )
    _add_format_flags(p)
    p.set_defaults(handler=cmd_hull)

    p = sub.add_parser("psnr", help="逐帧与序列的加权 PSNR")
    p.add_argument("--ref", type=Path, required=True, help="参考视频（raw 或 Y4M）")
    p.add_argument("--dist", type=Path, required=True, help="失真视频（raw 或 Y4M）")
    p.add_argument("--frames", type=int, help="最多比较的帧数")
    _add_video_flags(p)
    p.add_argument("--output", type=Path, help="输出 CSV 文件（默认标准输出）")
    p.set_defaults(handler=cmd_psnr)

    p = sub.add_parser("resample", help="CTC Lanczos 重采样")
    p.add_argument("--input", type=Path, required=True, help="输入视频（raw 或 Y4M）")
    p.add_argument("--output", type=Path, required=True, help="输出视频（按扩展名选择 raw 或 Y4M）")
    p.add_argument("--to", type=_resolution_arg, required=True, help="目标分辨率 WxH")
    p.add_argument("--frames", type=int, help="最多处理的帧数")
    p.add_argument("--filter-csv", type=Path, help="同时导出水平方向亮度滤波器组 CSV")
    _add_video_flags(p)
    p.set_defaults(handler=cmd_resample)

    p = sub.add_parser("run", help="按清单执行编码/解码/指标任务")
    p.add_argument("--manifest", type=Path, required=True, help="TOML 运行清单")
    p.add_argument("--codec", help="只运行这个 codec")
    p.add_argument("--parallelism", type=int, help="并发进程数（默认取清单配置）")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--dry-run", action="store_true", help="只打印命令，不执行")
    mode.add_argument("--force", action="store_true", help="忽略已有输出，全部重跑")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("report", help="按类别汇总的 CTC 报表")
    p.add_argument("--anchor", type=Path, required=True, help="锚点 RD CSV")
    p.add_argument("--test", type=Path, required=True, help="测试 RD CSV")
    p.add_argument("--manifest", type=Path, required=True, help="运行清单（提供序列类别）")
    _add_format_flags(p)
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("progress", help="多个版本报表 → 进度长表 CSV")
    p.add_argument(
        "--entry",
        type=_entry_arg,
        action="append",
        required=True,
        help="VERSION=REPORT_CSV（可重复，按给定顺序输出）",
    )
    p.add_argument("--output", type=Path, help="输出 CSV 文件（默认标准输出）")
    p.set_defaults(handler=cmd_progress)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse 的用法错误退出码为 2，--help 为 0
        return int(e.code or 0)

    _configure_logging(args.log_level)
    if args.command == "hull" and args.range is None:
        args.range = [QualityRange.FULL]
    if getattr(args, "parallelism", None) is not None and args.parallelism < 1:
        logger.error("❌ --parallelism 必须 ≥ 1: %d", args.parallelism)
        return int(ExitCode.PARSE)

    try:
        return int(args.handler(args))
    except AvCtcError as e:
        logger.error("❌ %s", e)
        return int(e.exit_code)
    except OSError as e:
        logger.error("❌ 文件操作失败: %s", e)
        return int(ExitCode.FAILURE)


if __name__ == "__main__":
    sys.exit(main())
