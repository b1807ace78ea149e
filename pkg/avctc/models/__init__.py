"""领域模型

所有模型构造后不可变。
"""

from avctc.models.frame import Frame, PlaneBuffer, PsnrTriple
from avctc.models.hull import ConvexHull, HullPoint
from avctc.models.job import JobResult, JobSpec, JobStatus
from avctc.models.manifest import CodecTemplates, LadderEntry, RunManifest, SequenceEntry
from avctc.models.metric_log import CurveKey, MetricLog
from avctc.models.rd import MetricId, QpSet, RDCurve, RDPoint
from avctc.models.report import (
    DEFAULT_REPORT_METRICS,
    BdRateResult,
    BdRateRow,
    GroupSpec,
    OverallSpec,
    PlaneWeights,
    QualityRange,
    ReportGrouping,
    ReportRow,
    ReportTable,
    WEIGHTED_LABEL,
)
from avctc.models.sequence import ChromaFormat, ChromaSiting, CodingConfig, SequenceInfo

__all__ = [
    "ChromaFormat",
    "ChromaSiting",
    "CodingConfig",
    "SequenceInfo",
    "MetricId",
    "QpSet",
    "RDPoint",
    "RDCurve",
    "PlaneBuffer",
    "Frame",
    "PsnrTriple",
    "HullPoint",
    "ConvexHull",
    "QualityRange",
    "PlaneWeights",
    "BdRateResult",
    "BdRateRow",
    "WEIGHTED_LABEL",
    "GroupSpec",
    "OverallSpec",
    "ReportGrouping",
    "ReportRow",
    "ReportTable",
    "DEFAULT_REPORT_METRICS",
    "MetricLog",
    "CurveKey",
    "RunManifest",
    "CodecTemplates",
    "SequenceEntry",
    "LadderEntry",
    "JobSpec",
    "JobResult",
    "JobStatus",
]
