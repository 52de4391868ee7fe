"""
评估服务

对 (片段, α, 后端) 网格执行 压缩 -> 重建 -> 与原始片段比较（物理单位），
按 (mode, sensor, α, backend) 聚合 MSE / RMSE / 准确率
"""
import asyncio
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.core.config import LlmConfig
from app.core.exceptions import (
    BadAlphaException,
    EmptyInputException,
    LengthMismatchException,
    RetriesExhaustedException,
    StorageException,
    UnknownBackendException,
    ValidationException,
)
from app.core.logging import get_logger
from app.models.prompt import PromptTemplate
from app.models.reconstruction import BACKEND_TAGS, EvaluationRecord, ReconstructionResult
from app.models.sensor import CompressionParams, SensorKind, SensorSegment, TransportMode, validate_segment
from app.services.codec import compress
from app.services.reconstruction_service import fallback_result, reconstruct, reconstruct_llm
from app.utils.llm_providers import ChatBackend

logger = get_logger(__name__)

REPORT_COLUMNS = ["mode", "sensor", "alpha", "backend", "mse", "rmse", "accuracy_pct", "n_segments"]

ReportFormat = Literal["csv", "json"]
GridKey = Tuple[TransportMode, SensorKind, float, str]


def mse(truth: Sequence[float], pred: Sequence[float]) -> float:
    """
    均方误差 (1/n)·Σ(y_i − ŷ_i)²

    Raises:
        EmptyInputException: 输入为空
        LengthMismatchException: 长度不一致
    """
    if len(truth) == 0 or len(pred) == 0:
        raise EmptyInputException("sequence")
    if len(truth) != len(pred):
        raise LengthMismatchException(len(pred), len(truth))
    diff = np.asarray(truth, dtype=float) - np.asarray(pred, dtype=float)
    return float(np.mean(diff * diff))


def accuracy_pct(mse_value: float, x_min: float, x_max: float) -> float:
    """
    准确率百分比：100·max(0, 1 − RMSE/(x_max − x_min))

    常数片段：MSE 为 0 时 100，否则 0
    """
    value_range = x_max - x_min
    if value_range <= 0:
        return 100.0 if mse_value == 0 else 0.0
    return 100.0 * max(0.0, 1.0 - math.sqrt(mse_value) / value_range)


@dataclass(frozen=True)
class _Outcome:
    key: GridKey
    mse: float
    accuracy: float
    fell_back: bool


def _check_grid_args(
    segments: Sequence[SensorSegment],
    alphas: Sequence[float],
    backends: Sequence[str],
    parallelism: int,
    llm_backend: Optional[ChatBackend],
) -> None:
    if not segments:
        raise EmptyInputException("segment list")
    if not alphas:
        raise EmptyInputException("alpha list")
    if not backends:
        raise EmptyInputException("backend list")
    if parallelism < 1:
        raise ValidationException(
            f"parallelism must be >= 1, got {parallelism}",
            code="bad_parallelism",
            details={"parallelism": parallelism},
        )
    for alpha in alphas:
        if not (math.isfinite(alpha) and 0 < alpha <= 1):
            raise BadAlphaException(alpha)
    for tag in backends:
        if tag not in BACKEND_TAGS:
            raise UnknownBackendException(tag, list(BACKEND_TAGS))
    if "llm" in backends and llm_backend is None:
        raise UnknownBackendException("llm (no LLM backend configured)", list(BACKEND_TAGS))
    for seg in segments:
        validate_segment(seg)


async def run_grid(
    segments: Sequence[SensorSegment],
    alphas: Sequence[float],
    backends: Sequence[str],
    parallelism: int = 4,
    llm_backend: Optional[ChatBackend] = None,
    template: Optional[PromptTemplate] = None,
    cfg: Optional[LlmConfig] = None,
) -> List[EvaluationRecord]:
    """
    执行评估网格

    Args:
        segments: 原始片段
        alphas: 压缩比列表
        backends: 后端标签列表（llm / linear / zoh / spline）
        parallelism: 同时进行的LLM调用上限
        llm_backend: backends 含 llm 时必需
        template: 提示模板
        cfg: LLM配置

    Returns:
        按 (mode, sensor, alpha, backend) 排序的聚合记录

    Raises:
        EmptyInputException / BadAlphaException / UnknownBackendException: 参数错误
    """
    _check_grid_args(segments, alphas, backends, parallelism, llm_backend)
    cfg = cfg or LlmConfig()
    semaphore = asyncio.Semaphore(parallelism)

    async def _evaluate(seg: SensorSegment, alpha: float, tag: str) -> _Outcome:
        cs = compress(seg, CompressionParams(alpha=alpha))
        result: ReconstructionResult
        if tag == "llm":
            async with semaphore:
                try:
                    result = await reconstruct_llm(cs, llm_backend, template, cfg)  # type: ignore[arg-type]
                except RetriesExhaustedException as e:
                    logger.error(
                        f"LLM retries exhausted for {seg.segment_id} at alpha={alpha}: {e.message}, "
                        f"using linear fallback"
                    )
                    result = fallback_result(cs, "retries_exhausted")
        else:
            result = await reconstruct(cs, tag)

        error = mse(seg.values, result.values)
        return _Outcome(
            key=(seg.mode, seg.sensor, alpha, tag),
            mse=error,
            accuracy=accuracy_pct(error, min(seg.values), max(seg.values)),
            fell_back=result.fell_back,
        )

    jobs = [_evaluate(seg, alpha, tag) for seg in segments for alpha in alphas for tag in backends]
    logger.info(
        f"Running evaluation grid: {len(segments)} segments x {len(alphas)} alphas x "
        f"{len(backends)} backends (parallelism={parallelism})"
    )
    outcomes = await asyncio.gather(*jobs)

    grouped: Dict[GridKey, List[_Outcome]] = defaultdict(list)
    for outcome in outcomes:
        grouped[outcome.key].append(outcome)

    records = []
    for (mode, sensor, alpha, tag), items in grouped.items():
        mean_mse = float(np.mean([o.mse for o in items]))
        n_fell_back = sum(o.fell_back for o in items)
        if n_fell_back:
            logger.warning(f"{n_fell_back}/{len(items)} {mode.value}/{sensor.value} segments fell back at alpha={alpha}")
        records.append(EvaluationRecord(
            mode=mode,
            sensor=sensor,
            alpha=alpha,
            backend=tag,
            mse=mean_mse,
            rmse=math.sqrt(mean_mse),
            accuracy_pct=min(100.0, float(np.mean([o.accuracy for o in items]))),
            n_segments=len(items),
            n_fell_back=n_fell_back,
        ))

    records.sort(key=lambda r: r.sort_key())
    return records


def run_grid_sync(
    segments: Sequence[SensorSegment],
    alphas: Sequence[float],
    backends: Sequence[str],
    parallelism: int = 4,
    **kwargs,
) -> List[EvaluationRecord]:
    """run_grid 的同步包装（事件循环之外调用）"""
    return asyncio.run(run_grid(segments, alphas, backends, parallelism, **kwargs))


def records_frame(records: Sequence[EvaluationRecord]) -> pd.DataFrame:
    rows = [r.model_dump(mode="json") for r in records]
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def write_report(
    records: Sequence[EvaluationRecord],
    path: Union[str, Path],
    format: ReportFormat = "csv",
) -> None:
    """
    写评估报告

    Raises:
        StorageException: 写入失败
    """
    ordered = sorted(records, key=lambda r: r.sort_key())
    try:
        if format == "csv":
            records_frame(ordered).to_csv(path, index=False, lineterminator="\n")
        elif format == "json":
            payload = [r.model_dump(mode="json") for r in ordered]
            Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        else:
            raise ValidationException(f"Unknown report format: {format}", code="bad_format")
    except OSError as e:
        raise StorageException(f"Cannot write report: {e}", path=str(path)) from e
    logger.info(f"Wrote {len(ordered)} evaluation records to {path}")
