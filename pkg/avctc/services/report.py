"""BD-rate 报表

把逐序列的 BD-rate 按类别汇总成 CTC 报表：
- 类别行：成员序列 BD-rate 的算术平均（不按类别加权）
- 汇总行（4:2:0 Overall / ECF Overall）：所有成员类别的全部序列取平均
- 输出：Markdown（jinja2 模板）或 CSV；进度序列为长表 CSV

均值用 math.fsum，输入顺序不影响结果。
"""

import csv
import io
import logging
import math
import re
from collections.abc import Iterable, Mapping, Sequence
from enum import Enum

from jinja2 import Environment, StrictUndefined

from avctc.config.ctc_tables import CONFIG_ORDER, DEFAULT_GROUPINGS, SUMMARY_ONLY_CONFIGS
from avctc.config.settings import settings
from avctc.exceptions import ArgumentError, EmptyGroupError, ParseError
from avctc.models.metric_log import CurveKey
from avctc.models.rd import MetricId, RDCurve
from avctc.models.report import (
    DEFAULT_REPORT_METRICS,
    WEIGHTED_LABEL,
    BdRateResult,
    BdRateRow,
    QualityRange,
    ReportGrouping,
    ReportRow,
    ReportTable,
)
from avctc.models.sequence import CodingConfig
from avctc.services.bdrate import bd_rate_all_ranges, bd_rate_weighted
from avctc.services.hull import build_hull, group_resolutions, hull_bd_rate
from avctc.services.ingest import format_resolution

logger = logging.getLogger(__name__)

PerSequenceResults = Mapping[tuple[str, MetricId], BdRateResult | float]

REPORT_CSV_FIXED_COLUMNS = ["config", "class", "overall", "sequences"]
PROGRESS_CSV_COLUMNS = ["version", "config", "class", "metric", "bdrate"]
MISSING_CELL = "-"


class ReportFormat(str, Enum):
    CSV = "csv"
    MARKDOWN = "markdown"


# ========== 汇总 ==========


def _value_of(result: BdRateResult | float) -> float:
    return result.value if isinstance(result, BdRateResult) else float(result)


def _mean_cells(
    members: Iterable[str], values: Mapping[tuple[str, MetricId], float], metrics: Sequence[MetricId]
) -> dict[MetricId, float | None]:
    member_list = sorted(members)
    cells: dict[MetricId, float | None] = {}
    for metric in metrics:
        present = [values[(seq, metric)] for seq in member_list if (seq, metric) in values]
        cells[metric] = math.fsum(present) / len(present) if present else None
    return cells


def aggregate_report(
    per_sequence: PerSequenceResults,
    grouping: ReportGrouping,
    classes: Mapping[str, str],
    metrics: Sequence[MetricId] = DEFAULT_REPORT_METRICS,
) -> ReportTable:
    """按 grouping 汇总逐序列 BD-rate

    Args:
        per_sequence: (序列名, 指标) → BdRateResult 或比例值
        grouping: 该编码配置的行结构
        classes: 序列名 → 类别标签
        metrics: 报表列

    Raises:
        ArgumentError: 序列缺少类别信息
        EmptyGroupError: 某个类别行没有成员序列
    """
    values = {key: _value_of(result) for key, result in per_sequence.items()}

    members: dict[str, set[str]] = {g.label: set() for g in grouping.groups}
    for sequence in sorted({seq for seq, _ in values}):
        if sequence not in classes:
            raise ArgumentError(f"序列 {sequence} 缺少类别信息")
        label = grouping.group_of(classes[sequence])
        if label is None:
            logger.warning(
                "⚠️ 序列 %s（类别 %s）不属于 %s 的任何报表行，已忽略",
                sequence,
                classes[sequence],
                grouping.config.value,
            )
            continue
        members[label].add(sequence)

    rows: list[ReportRow] = []
    for group in grouping.groups:
        if not members[group.label]:
            raise EmptyGroupError(f"{grouping.config.value} 报表行 {group.label} 没有成员序列")
        rows.append(
            ReportRow(
                config=grouping.config,
                label=group.label,
                sequence_count=len(members[group.label]),
                cells=_mean_cells(members[group.label], values, metrics),
            )
        )

    for overall in grouping.overall:
        pooled = set().union(*(members[label] for label in overall.groups))
        if not pooled:
            raise EmptyGroupError(f"{grouping.config.value} 汇总行 {overall.label} 没有成员序列")
        rows.append(
            ReportRow(
                config=grouping.config,
                label=overall.label,
                is_overall=True,
                sequence_count=len(pooled),
                cells=_mean_cells(pooled, values, metrics),
            )
        )

    logger.info(
        "📊 %s 报表: %d 行, %d 个序列",
        grouping.config.value,
        len(rows),
        sum(len(m) for m in members.values()),
    )
    return ReportTable(metrics=tuple(metrics), rows=tuple(rows))


def aggregate_present(
    per_sequence: PerSequenceResults,
    grouping: ReportGrouping,
    classes: Mapping[str, str],
    metrics: Sequence[MetricId] = DEFAULT_REPORT_METRICS,
) -> ReportTable:
    """只保留有成员序列的行后再汇总"""
    present = {classes[seq] for seq, _ in per_sequence if seq in classes}
    return aggregate_report(per_sequence, grouping.restricted_to(present), classes, metrics)


def _config_rank(config: CodingConfig) -> int:
    return CONFIG_ORDER.index(config)


def combine_reports(tables: Iterable[ReportTable]) -> ReportTable:
    """多个配置的报表合并成一张，按 AI, RA, LD, AS, SI 排序

    Raises:
        ArgumentError: 报表列不一致或同一配置出现两次
    """
    tables = list(tables)
    if not tables:
        return ReportTable()
    metrics = tables[0].metrics
    seen: set[CodingConfig] = set()
    for table in tables:
        if table.metrics != metrics:
            raise ArgumentError("合并的报表列不一致")
        configs = {row.config for row in table.rows}
        if configs & seen:
            raise ArgumentError(f"配置重复: {sorted(c.value for c in configs & seen)}")
        seen |= configs

    # sorted 是稳定的，同一配置内保持原有行顺序
    rows = sorted((row for table in tables for row in table.rows), key=lambda r: _config_rank(r.config))
    return ReportTable(metrics=metrics, rows=tuple(rows))


# ========== 输出 ==========


def format_percent(value: float | None, decimals: int | None = None) -> str:
    """比例值 → 带符号的百分比字符串，如 -0.25 → "-25.00%"

    Examples:
        >>> format_percent(-0.2981)
        '-29.81%'
        >>> format_percent(None)
        '-'
    """
    if value is None:
        return MISSING_CELL
    places = settings.REPORT_PERCENT_DECIMALS if decimals is None else decimals
    # + 0.0 把 -0.0 规范成 0.0
    percent = round(value * 100.0, places) + 0.0
    return f"{percent:+.{places}f}%"


def _plain_percent(value: float | None) -> str:
    if value is None:
        return ""
    places = settings.REPORT_PERCENT_DECIMALS
    return f"{round(value * 100.0, places) + 0.0:.{places}f}"


_MARKDOWN_TEMPLATE = """\
| Config | Class |{% for m in metrics %} {{ m.label }} |{% endfor %}
| --- | --- |{% for m in metrics %} ---: |{% endfor %}
{% for row in rows -%}
| {{ row.config }} | {{ row.label | em(row.bold) }} |{% for cell in row.cells %} {{ cell | em(row.bold) }} |{% endfor %}
{% endfor %}"""


def _emphasize(text: str, bold: bool) -> str:
    return f"**{text}**" if bold and text != MISSING_CELL else text


_env = Environment(undefined=StrictUndefined, keep_trailing_newline=True, autoescape=False)
_env.filters["em"] = _emphasize
_markdown = _env.from_string(_MARKDOWN_TEMPLATE)


def _render_markdown(table: ReportTable) -> str:
    rows = [
        {
            "config": row.config.value,
            "label": row.label,
            "bold": row.is_overall or row.config in SUMMARY_ONLY_CONFIGS,
            "cells": [format_percent(row.cells.get(m)) for m in table.metrics],
        }
        for row in table.rows
    ]
    return _markdown.render(metrics=table.metrics, rows=rows)


def _render_csv(table: ReportTable) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([*REPORT_CSV_FIXED_COLUMNS, *(m.value for m in table.metrics)])
    for row in table.rows:
        writer.writerow(
            [
                row.config.value,
                row.label,
                int(row.is_overall),
                row.sequence_count,
                *(_plain_percent(row.cells.get(m)) for m in table.metrics),
            ]
        )
    return buffer.getvalue()


def emit_report(table: ReportTable, fmt: ReportFormat | str = ReportFormat.MARKDOWN) -> bytes:
    """报表序列化为字节（UTF-8，\\n 换行），相同输入得到相同字节"""
    fmt = ReportFormat(fmt)
    text = _render_markdown(table) if fmt is ReportFormat.MARKDOWN else _render_csv(table)
    return text.encode("utf-8")


def parse_report_csv(data: bytes | str) -> ReportTable:
    """读回 emit_report(..., "csv") 的输出，百分比按 2 位小数精度还原

    Raises:
        ParseError: 表头或取值无效
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or header[: len(REPORT_CSV_FIXED_COLUMNS)] != REPORT_CSV_FIXED_COLUMNS:
        raise ParseError(f"报表 CSV 表头无效: {header}")
    try:
        metrics = tuple(MetricId(name) for name in header[len(REPORT_CSV_FIXED_COLUMNS) :])
    except ValueError as e:
        raise ParseError(f"报表 CSV 含未知指标列: {e}") from e

    rows: list[ReportRow] = []
    for line_no, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(header):
            raise ParseError(f"报表 CSV 第 {line_no} 行列数 {len(record)} ≠ {len(header)}")
        config, label, overall, count, *cells = record
        try:
            rows.append(
                ReportRow(
                    config=CodingConfig(config),
                    label=label,
                    is_overall=overall == "1",
                    sequence_count=int(count),
                    cells={m: float(c) / 100.0 if c else None for m, c in zip(metrics, cells, strict=True)},
                )
            )
        except ValueError as e:
            raise ParseError(f"报表 CSV 第 {line_no} 行无效: {e}") from e
    return ReportTable(metrics=metrics, rows=tuple(rows))


def _natural_key(text: str) -> tuple[tuple[int, int | str], ...]:
    return tuple((0, int(t)) if t.isdigit() else (1, t) for t in re.split(r"(\d+)", text) if t)


def _class_rank(config: CodingConfig, label: str) -> tuple[int, str]:
    grouping = DEFAULT_GROUPINGS.get(config)
    labels: list[str] = []
    if grouping is not None:
        labels = [g.label for g in grouping.groups] + [o.label for o in grouping.overall]
    return (labels.index(label), "") if label in labels else (len(labels), label)


def emit_progress_series(history: Sequence[tuple[str, ReportTable]]) -> str:
    """多个版本的报表 → 长表 CSV（version, config, class, metric, bdrate）

    行按 (版本, 配置, 类别) 排序：版本按自然序（v2 在 v10 之前），配置按 AI, RA, LD, AS, SI，
    类别按默认报表结构中的行顺序（不认识的类别排在后面、按名称）；同一行内按指标列顺序展开。
    缺失的单元格输出空字符串。

    Raises:
        ArgumentError: history 为空或版本号重复
    """
    if not history:
        raise ArgumentError("进度序列至少需要 1 个版本")
    versions = [version for version, _ in history]
    if len(set(versions)) != len(versions):
        raise ArgumentError(f"版本号重复: {versions}")

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(PROGRESS_CSV_COLUMNS)
    for version, table in sorted(history, key=lambda item: _natural_key(item[0])):
        rows = sorted(
            table.rows, key=lambda r: (_config_rank(r.config), _class_rank(r.config, r.label))
        )
        for row in rows:
            for metric in table.metrics:
                writer.writerow(
                    [version, row.config.value, row.label, metric.value, _plain_percent(row.cells.get(metric))]
                )
    return buffer.getvalue()


# ========== 逐序列 BD-rate 表 ==========


def compare_curve_sets(
    anchor: Mapping[CurveKey, Mapping[MetricId, RDCurve]],
    test: Mapping[CurveKey, Mapping[MetricId, RDCurve]],
    metrics: Sequence[MetricId] | None = None,
    ranges: Sequence[QualityRange] = tuple(QualityRange),
) -> list[BdRateRow]:
    """逐曲线计算锚点与测试之间的 BD-rate

    曲线点数不是 6 时只计算 FULL 区间，其余区间留空。
    PSNR_Y/U/V 三个平面都有结果时追加一行 WEIGHTED。

    Raises:
        ArgumentError: 测试数据缺少锚点中的曲线，或没有可比较的指标
        OverlapError / ExclusionError: 由 bd_rate 抛出
    """
    missing = sorted(str(key) for key in anchor if key not in test)
    if missing:
        raise ArgumentError(f"测试数据缺少锚点中的曲线: {', '.join(missing)}")

    rows: list[BdRateRow] = []
    for key in sorted(anchor, key=_curve_order):
        common = [m for m in MetricId if m in anchor[key] and m in test[key]]
        selected = [m for m in common if metrics is None or m in metrics]
        if metrics is not None:
            for metric in metrics:
                if metric not in common:
                    logger.warning("⚠️ %s: 锚点或测试缺少指标 %s，已跳过", key.sequence, metric.value)

        per_metric: dict[MetricId, dict[QualityRange, float | None]] = {}
        for metric in selected:
            a, t = anchor[key][metric], test[key][metric]
            results = bd_rate_all_ranges(a, t, ranges)
            per_metric[metric] = {r: results[r].value if r in results else None for r in ranges}
            rows.append(_bdrate_row(key, a, metric.value, per_metric[metric]))

        planes = (MetricId.PSNR_Y, MetricId.PSNR_U, MetricId.PSNR_V)
        if all(p in per_metric for p in planes):
            weighted: dict[QualityRange, float | None] = {}
            for r in ranges:
                y, u, v = (per_metric[p][r] for p in planes)
                weighted[r] = None if y is None or u is None or v is None else bd_rate_weighted(y, u, v)
            rows.append(_bdrate_row(key, anchor[key][MetricId.PSNR_Y], WEIGHTED_LABEL, weighted))

    if not rows:
        raise ArgumentError("锚点与测试之间没有可比较的指标")
    return rows


def _curve_order(key: CurveKey) -> tuple[str, int, tuple[int, int]]:
    config_rank = _config_rank(key.config) if key.config else -1
    resolution = key.resolution or (0, 0)
    return (key.sequence, config_rank, (-resolution[0], -resolution[1]))


def _bdrate_row(
    key: CurveKey, curve: RDCurve, metric: str, values: dict[QualityRange, float | None]
) -> BdRateRow:
    return BdRateRow(
        sequence=key.sequence,
        config=curve.config,
        resolution=key.resolution or curve.resolution,
        metric=metric,
        values=values,
    )


def per_sequence_full(rows: Iterable[BdRateRow], config: CodingConfig) -> dict[tuple[str, MetricId], float]:
    """bdrate 表 → aggregate_report 的输入（FULL 区间，不含 WEIGHTED 行）"""
    result: dict[tuple[str, MetricId], float] = {}
    for row in rows:
        if row.config is not config or row.metric == WEIGHTED_LABEL:
            continue
        value = row.values.get(QualityRange.FULL)
        if value is not None:
            result[(row.sequence, MetricId(row.metric))] = value
    return result


def _format_ratio(value: float | None) -> str:
    return "" if value is None else f"{value + 0.0:.6f}"


_BDRATE_MARKDOWN_TEMPLATE = """\
| Sequence | Config | Metric |{% for r in ranges %} {{ r }} |{% endfor %}
| --- | --- | --- |{% for r in ranges %} ---: |{% endfor %}
{% for row in rows -%}
| {{ row.sequence }} | {{ row.config }} | {{ row.metric }} |{% for cell in row.cells %} {{ cell }} |{% endfor %}
{% endfor %}"""

_bdrate_markdown = _env.from_string(_BDRATE_MARKDOWN_TEMPLATE)


def emit_bdrate_rows(
    rows: Sequence[BdRateRow],
    fmt: ReportFormat | str = ReportFormat.MARKDOWN,
    ranges: Sequence[QualityRange] = tuple(QualityRange),
) -> bytes:
    """逐序列 BD-rate 表序列化

    CSV 为 6 位小数的比例值；Markdown 为 2 位小数的带符号百分比。
    """
    fmt = ReportFormat(fmt)
    if fmt is ReportFormat.CSV:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["sequence", "config", "resolution", "metric", *(r.value for r in ranges)])
        for row in rows:
            writer.writerow(
                [
                    row.sequence,
                    row.config.value,
                    format_resolution(row.resolution),
                    row.metric,
                    *(_format_ratio(row.values.get(r)) for r in ranges),
                ]
            )
        return buffer.getvalue().encode("utf-8")

    rendered = [
        {
            "sequence": row.sequence,
            "config": row.config.value,
            "metric": row.metric,
            "cells": [format_percent(row.values.get(r)) for r in ranges],
        }
        for row in rows
    ]
    text = _bdrate_markdown.render(ranges=[r.value.capitalize() for r in ranges], rows=rendered)
    return text.encode("utf-8")


# ========== CTC 报表 ==========


def hull_per_sequence(
    anchor: Mapping[CurveKey, Mapping[MetricId, RDCurve]],
    test: Mapping[CurveKey, Mapping[MetricId, RDCurve]],
    metrics: Sequence[MetricId],
) -> dict[tuple[str, MetricId], float]:
    """AS：每个序列各分辨率曲线的凸包之间的 BD-rate"""
    result: dict[tuple[str, MetricId], float] = {}
    for metric in metrics:
        anchor_groups = group_resolutions(anchor, metric)
        test_groups = group_resolutions(test, metric)
        for sequence in sorted(anchor_groups):
            if sequence not in test_groups:
                raise ArgumentError(f"测试数据缺少 {sequence} 的 AS 曲线")
            result[(sequence, metric)] = hull_bd_rate(
                build_hull(anchor_groups[sequence]), build_hull(test_groups[sequence])
            ).value
    return result


def build_report(
    anchor: Mapping[CurveKey, Mapping[MetricId, RDCurve]],
    test: Mapping[CurveKey, Mapping[MetricId, RDCurve]],
    classes: Mapping[str, str],
    configs: Sequence[CodingConfig] = CONFIG_ORDER,
    metrics: Sequence[MetricId] = DEFAULT_REPORT_METRICS,
) -> ReportTable:
    """锚点/测试 RD 曲线 → 多配置 CTC 报表

    AI/RA/LD/SI 用逐序列 BD-rate，AS 用凸包 BD-rate；没有数据的配置不出现在报表中。
    """
    present = {key.config for key in anchor}
    tables: list[ReportTable] = []
    for config in configs:
        if config not in present:
            continue
        subset_a = {k: v for k, v in anchor.items() if k.config is config}
        subset_t = {k: v for k, v in test.items() if k.config is config}
        if config is CodingConfig.ADAPTIVE_STREAMING:
            available = [m for m in metrics if any(m in curves for curves in subset_a.values())]
            per_sequence = hull_per_sequence(subset_a, subset_t, available)
        else:
            rows = compare_curve_sets(subset_a, subset_t, metrics, ranges=(QualityRange.FULL,))
            per_sequence = per_sequence_full(rows, config)
        tables.append(aggregate_present(per_sequence, DEFAULT_GROUPINGS[config], classes, metrics))
    return combine_reports(tables) if tables else ReportTable(metrics=tuple(metrics))
