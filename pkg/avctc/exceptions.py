"""异常定义

所有领域异常都继承 AvCtcError，并携带 exit_code，
CLI 只需在一个地方把异常映射为进程退出码。
"""

import enum


class ExitCode(enum.IntEnum):
    """CLI 退出码约定（CI 据此区分数据错误和方法学错误）"""

    OK = 0
    FAILURE = 1
    PARSE = 2
    OVERLAP = 3
    EXCLUSION = 4


class AvCtcError(Exception):
    """工具包异常基类"""

    exit_code: ExitCode = ExitCode.FAILURE


class ConfigurationError(AvCtcError):
    """CTC 配置组合未定义，或 manifest 内容无效"""

    exit_code = ExitCode.PARSE


class ArgumentError(AvCtcError, ValueError):
    """调用参数不满足前置条件"""

    exit_code = ExitCode.PARSE


class CurveError(ArgumentError):
    """RD 曲线构造失败（非正码率、重复码率等）"""


class FitError(ArgumentError):
    """PCHIP 拟合失败（点数不足或 x 非严格递增）"""


class DomainError(ArgumentError):
    """在样条定义域之外求值或积分（禁止外推）"""


class ParseError(AvCtcError):
    """输入文件（日志、CSV、manifest、Y4M 头）无法解析"""

    exit_code = ExitCode.PARSE


class VideoFormatError(ParseError):
    """原始视频格式错误：截断、头不匹配、样本越界"""


class TemplateError(ConfigurationError):
    """命令模板缺少占位符或存在未解析的占位符"""


class OverlapError(AvCtcError):
    """两条曲线没有可用的质量重叠区间"""

    exit_code = ExitCode.OVERLAP


class ExclusionError(AvCtcError):
    """饱和点剔除后曲线不可用"""

    exit_code = ExitCode.EXCLUSION


class NonMonotonicCurveError(ExclusionError):
    """非饱和指标（PSNR 系）曲线出现非单调，属于数据错误"""


class EmptyGroupError(AvCtcError):
    """报表分组中没有任何序列"""


class CollectError(AvCtcError):
    """任务产物缺失或无效（码流、指标日志）"""
