"""
重建服务

把压缩片段恢复为 n_total 个物理单位的值：
- llm: 提示 -> LLM -> 解析 -> 截断到 [0, 1] -> 逆缩放，解析失败时纠正一次，仍失败则回退到线性插值
- linear / zoh / spline: 确定性基线
"""
from typing import List, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from app.core.config import LlmConfig
from app.core.exceptions import ParseException, UnknownBackendException
from app.core.logging import get_logger, set_log_context
from app.core.prometheus import PrometheusMetrics
from app.models.prompt import PromptTemplate
from app.models.reconstruction import BACKEND_TAGS, ReconstructionResult
from app.models.sensor import CompressedSegment
from app.services.codec import inverse_rescale, plan_indices
from app.services.llm_service import complete
from app.services.parser import clamp_to_unit, parse_sequence
from app.services.prompting import build_prompt, correction_prompt, default_template
from app.utils.llm_providers import ChatBackend

logger = get_logger(__name__)


def _anchors(cs: CompressedSegment) -> np.ndarray:
    return np.asarray(plan_indices(cs.n_total, cs.alpha).kept_indices, dtype=float)


def _to_result(cs: CompressedSegment, backend: str, scaled, **extra) -> ReconstructionResult:
    values = inverse_rescale(scaled, cs.x_min, cs.x_max)
    return ReconstructionResult(segment_id=cs.segment_id, backend=backend, values=tuple(values), **extra)


def linear_scaled(cs: CompressedSegment) -> List[float]:
    """缩放空间中的分段线性插值"""
    positions = np.arange(cs.n_total)
    return np.interp(positions, _anchors(cs), np.asarray(cs.values_scaled)).tolist()


def reconstruct_linear(cs: CompressedSegment) -> ReconstructionResult:
    """线性插值基线"""
    return _to_result(cs, "linear", linear_scaled(cs))


def reconstruct_zoh(cs: CompressedSegment) -> ReconstructionResult:
    """零阶保持：每个锚点的值保持到下一个锚点之前"""
    anchors = _anchors(cs)
    positions = np.arange(cs.n_total)
    slot = np.searchsorted(anchors, positions, side="right") - 1
    scaled = np.asarray(cs.values_scaled)[slot]
    return _to_result(cs, "zoh", scaled.tolist())


def reconstruct_spline(cs: CompressedSegment) -> ReconstructionResult:
    """
    自然三次样条

    少于3个锚点时等同线性插值；结果截断到 [0, 1] 防止过冲
    """
    if cs.n_kept < 3:
        return _to_result(cs, "spline", linear_scaled(cs))
    spline = CubicSpline(_anchors(cs), np.asarray(cs.values_scaled), bc_type="natural")
    scaled = np.clip(spline(np.arange(cs.n_total)), 0.0, 1.0)
    return _to_result(cs, "spline", scaled.tolist())


async def reconstruct_llm(
    cs: CompressedSegment,
    backend: ChatBackend,
    template: Optional[PromptTemplate] = None,
    cfg: Optional[LlmConfig] = None,
) -> ReconstructionResult:
    """
    LLM重建

    只有传输错误（RetriesExhaustedException 等）会抛出，解析失败由回退策略吸收

    Args:
        cs: 压缩片段
        backend: LLM后端
        template: 提示模板，默认内置模板
        cfg: LLM配置，默认从环境加载

    Returns:
        ReconstructionResult（backend="llm"）
    """
    set_log_context(segment_id=cs.segment_id)
    template = template or default_template()
    cfg = cfg or LlmConfig()

    bundle = build_prompt(cs, template)
    reply = await complete(bundle, cfg, backend)
    retries = reply.attempt - 1

    try:
        parsed = parse_sequence(reply.text, cs.n_total)
    except ParseException as first_error:
        PrometheusMetrics.record_parse_failure(first_error.code)
        logger.warning(f"Unparseable LLM reply ({first_error.code}): {first_error.message}, re-prompting")

        reply = await complete(correction_prompt(bundle), cfg, backend)
        retries += reply.attempt - 1 + 1
        try:
            parsed = parse_sequence(reply.text, cs.n_total)
        except ParseException as second_error:
            PrometheusMetrics.record_parse_failure(second_error.code)
            PrometheusMetrics.record_fallback(second_error.code)
            logger.warning(
                f"LLM reply still unparseable ({second_error.code}), falling back to linear interpolation"
            )
            return _to_result(
                cs, "llm", linear_scaled(cs),
                retries_used=retries, fell_back=True, raw_reply=reply.text,
            )

    return _to_result(
        cs, "llm", clamp_to_unit(parsed),
        retries_used=retries, fell_back=False, raw_reply=reply.text,
    )


async def reconstruct(
    cs: CompressedSegment,
    backend_tag: str,
    llm_backend: Optional[ChatBackend] = None,
    template: Optional[PromptTemplate] = None,
    cfg: Optional[LlmConfig] = None,
) -> ReconstructionResult:
    """
    按后端标签分派

    Raises:
        UnknownBackendException: 未知标签，或 llm 标签缺少后端
    """
    if backend_tag == "linear":
        return reconstruct_linear(cs)
    if backend_tag == "zoh":
        return reconstruct_zoh(cs)
    if backend_tag == "spline":
        return reconstruct_spline(cs)
    if backend_tag == "llm":
        if llm_backend is None:
            raise UnknownBackendException("llm (no LLM backend configured)", list(BACKEND_TAGS))
        return await reconstruct_llm(cs, llm_backend, template, cfg)
    raise UnknownBackendException(backend_tag, list(BACKEND_TAGS))


def fallback_result(cs: CompressedSegment, reason: str) -> ReconstructionResult:
    """LLM重试耗尽时的线性回退（评估用）"""
    PrometheusMetrics.record_fallback(reason)
    return _to_result(cs, "llm", linear_scaled(cs), fell_back=True)
