"""
LLM回复解析

从自由文本中提取期望长度的数字序列：取最长的连续数字串，
长度相同时取最后一个（复述的输入总是出现在答案之前）。
"""
import re
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.config import settings
from app.core.exceptions import NoNumbersFoundException, OutOfBandException, ReplyLengthMismatchException

NUMBER_RE = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
# 括号单独成词；空白、逗号、分号只是分隔符
TOKEN_RE = re.compile(r"[\[\](){}]|[^\s,;\[\](){}]+")
# 行首的列表标记（"1." "2)" "-" "•"），后面须有空白和内容
LIST_MARKER_RE = re.compile(r"^[ \t]*(?:\d+[.)]|[-•])[ \t]+(?=\S)", re.MULTILINE)
_BRACKETS = frozenset("[](){}")
_DECORATION = "\"'`*_"
_UNICODE_MINUS = {"−": "-", "–": "-"}

_BREAK = object()


def _normalize(token: str) -> str:
    for src, dst in _UNICODE_MINUS.items():
        token = token.replace(src, dst)
    token = token.strip(_DECORATION)
    if len(token) > 1 and token.endswith("."):
        token = token[:-1]
    return token


def _tokens(text: str) -> Iterator[Union[float, object]]:
    for match in TOKEN_RE.finditer(LIST_MARKER_RE.sub("", text)):
        raw = match.group(0)
        if raw in _BRACKETS:
            yield _BREAK
            continue
        token = _normalize(raw)
        if not token:
            # 纯装饰符号，例如 ``` 或 **
            continue
        if NUMBER_RE.fullmatch(token):
            yield float(token)
        else:
            yield _BREAK


def numeric_runs(text: str) -> List[List[float]]:
    """按出现顺序返回全部连续数字串"""
    runs: List[List[float]] = []
    current: List[float] = []
    for token in _tokens(text):
        if token is _BREAK:
            if current:
                runs.append(current)
                current = []
        else:
            current.append(token)  # type: ignore[arg-type]
    if current:
        runs.append(current)
    return runs


def longest_numeric_run(text: str) -> List[float]:
    """
    最长连续数字串（并列时取最后一个）

    Raises:
        NoNumbersFoundException: 文本中没有数字
    """
    best: Optional[List[float]] = None
    for run in numeric_runs(text):
        if best is None or len(run) >= len(best):
            best = run
    if best is None:
        raise NoNumbersFoundException()
    return best


def parse_sequence(
    text: str,
    expected_length: int,
    band: Optional[Tuple[float, float]] = None
) -> List[float]:
    """
    解析回复中的数字序列

    Args:
        text: LLM回复文本
        expected_length: 期望长度（n_total）
        band: 合理性区间，默认取 settings.PARSER_BAND_LOW/HIGH

    Returns:
        数字序列

    Raises:
        NoNumbersFoundException: 没有数字
        ReplyLengthMismatchException: 最长数字串长度不符
        OutOfBandException: 数值超出合理区间
    """
    low, high = band if band is not None else (settings.PARSER_BAND_LOW, settings.PARSER_BAND_HIGH)
    run = longest_numeric_run(text)
    if len(run) != expected_length:
        raise ReplyLengthMismatchException(len(run), expected_length)
    for index, value in enumerate(run):
        if not (low <= value <= high):
            raise OutOfBandException(index, value)
    return run


def clamp_to_unit(values: Sequence[float]) -> List[float]:
    """逐元素截断到 [0, 1]"""
    return np.clip(np.asarray(values, dtype=float), 0.0, 1.0).tolist()
