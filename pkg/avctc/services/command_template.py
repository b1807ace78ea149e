"""命令模板渲染

清单里的编码/解码/指标命令是带 {占位符} 的字符串，例如：

    aomenc --limit={frames} --end-usage=q --cq-level={qp} -o {output} {input}

渲染时先按 shell 规则切分成参数，再逐个参数替换占位符，
路径里带空格也不会被拆开。字面量大括号写成 {{ 和 }}。
"""

import shlex
import string
from collections.abc import Iterable, Mapping
from typing import Any

from avctc.exceptions import TemplateError

# 各阶段必须出现的占位符
REQUIRED_ENCODE_VARIABLES = frozenset({"input", "output", "qp", "width", "height"})
REQUIRED_DECODE_VARIABLES = frozenset({"input", "output"})
REQUIRED_METRIC_VARIABLES = frozenset({"ref", "dist", "output"})

# 所有阶段都能用的占位符
COMMON_VARIABLES = frozenset(
    {
        "sequence",
        "config",
        "qp",
        "width",
        "height",
        "frames",
        "tiles",
        "fps_num",
        "fps_denom",
        "bitdepth",
        "chroma",
        "source",
        "source_width",
        "source_height",
        "bitstream",
        "decoded",
        "log",
    }
)
ALLOWED_VARIABLES = COMMON_VARIABLES | {"input", "output", "ref", "dist"}

_formatter = string.Formatter()


def extract_variables(template: str) -> set[str]:
    """提取模板中的占位符名

    Raises:
        TemplateError: 大括号不成对

    Examples:
        >>> sorted(extract_variables("enc -q {qp} -o {output} {input}"))
        ['input', 'output', 'qp']
    """
    try:
        return {field for _, field, _, _ in _formatter.parse(template) if field is not None}
    except ValueError as e:
        raise TemplateError(f"模板语法错误: {template!r}: {e}") from e


def validate_template(
    template: str,
    required: Iterable[str] = (),
    allowed: Iterable[str] = ALLOWED_VARIABLES,
) -> set[str]:
    """检查模板语法、必需占位符和未知占位符，返回模板用到的占位符

    Raises:
        TemplateError: 语法错误、缺少必需占位符、出现未知占位符
    """
    variables = extract_variables(template)

    invalid = sorted(v for v in variables if not v.isidentifier())
    if invalid:
        raise TemplateError(f"占位符只能是标识符（不支持位置参数、属性或下标）: {invalid}")

    missing = sorted(set(required) - variables)
    if missing:
        raise TemplateError(f"模板缺少必需的占位符 {missing}: {template!r}")

    unknown = sorted(variables - set(allowed))
    if unknown:
        raise TemplateError(f"模板包含未知占位符 {unknown}，可用: {sorted(allowed)}")

    try:
        shlex.split(template)
    except ValueError as e:
        raise TemplateError(f"模板引号不成对: {template!r}") from e
    return variables


def render_template(template: str, variables: Mapping[str, Any]) -> str:
    """替换占位符

    Raises:
        TemplateError: 缺少变量值或语法错误

    Examples:
        >>> render_template("--cq-level={qp}", {"qp": 110})
        '--cq-level=110'
    """
    try:
        return template.format_map(variables)
    except KeyError as e:
        raise TemplateError(
            f"缺少模板变量 {e.args[0]}，提供了: {', '.join(sorted(variables)) or '无'}"
        ) from e
    except (ValueError, IndexError, AttributeError) as e:
        raise TemplateError(f"模板渲染失败: {template!r}: {e}") from e


def render_argv(template: str, variables: Mapping[str, Any]) -> tuple[str, ...]:
    """先切分再渲染，得到参数向量

    Examples:
        >>> render_argv("enc -o {output} {input}", {"output": "a b.obu", "input": "in.yuv"})
        ('enc', '-o', 'a b.obu', 'in.yuv')
    """
    try:
        tokens = shlex.split(template)
    except ValueError as e:
        raise TemplateError(f"模板引号不成对: {template!r}") from e
    if not tokens:
        raise TemplateError("模板为空")
    return tuple(render_template(token, variables) for token in tokens)


def format_argv(argv: Iterable[str]) -> str:
    """参数向量 → 可复制到 shell 的命令行"""
    return shlex.join(argv)
