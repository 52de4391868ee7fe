"""
边缘侧压缩编解码

跳跃采样 -> 缩放到 [0, 1] -> 截断到两位小数，以及云端需要的逆映射。
全部为纯函数，可以在任意并发场景下调用。
"""
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from app.core.exceptions import BadAlphaException, LengthMismatchException, SegmentTooShortException
from app.core.logging import get_logger
from app.core.prometheus import PrometheusMetrics
from app.models.reconstruction import CompressionStats
from app.models.sensor import CompressedSegment, CompressionParams, SensorSegment, validate_segment

logger = get_logger(__name__)


@dataclass(frozen=True)
class IndexPlan:
    """保留下标计划"""
    n_total: int
    kept_indices: Tuple[int, ...]

    @property
    def n_kept(self) -> int:
        return len(self.kept_indices)


def kept_count(n_total: int, alpha: float) -> int:
    """max(2, floor(alpha * n_total))"""
    return max(2, math.floor(alpha * n_total))


def spread_indices(n_total: int, m: int) -> List[int]:
    """
    在 [0, n_total-1] 上均匀放置 m 个下标（含两端）

    round-half-up(j*(n-1)/(m-1))，整数运算避免浮点舍入造成重复
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    span = n_total - 1
    denom = 2 * (m - 1)
    indices: List[int] = []
    for j in range(m):
        idx = (2 * j * span + (m - 1)) // denom
        if not indices or idx != indices[-1]:
            indices.append(idx)
    return indices


def plan_indices(n_total: int, alpha: float) -> IndexPlan:
    """
    计算保留下标

    Raises:
        SegmentTooShortException: n_total < 2
        BadAlphaException: alpha 不在 (0, 1]
    """
    if n_total < 2:
        raise SegmentTooShortException(n_total)
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha) and 0 < alpha <= 1):
        raise BadAlphaException(alpha)
    m = kept_count(n_total, alpha)
    return IndexPlan(n_total=n_total, kept_indices=tuple(spread_indices(n_total, m)))


def skip_sample(values: Sequence[float], plan: IndexPlan) -> List[float]:
    """output[j] = values[kept_indices[j]]"""
    if len(values) != plan.n_total:
        raise LengthMismatchException(len(values), plan.n_total)
    return [float(values[i]) for i in plan.kept_indices]


def rescale(values: Sequence[float]) -> Tuple[List[float], float, float]:
    """
    min-max 缩放到 [0, 1]

    x_max == x_min 时全部为 0
    """
    arr = np.asarray(values, dtype=float)
    x_min = float(arr.min())
    x_max = float(arr.max())
    if x_max == x_min:
        return [0.0] * len(arr), x_min, x_max
    scaled = (arr - x_min) / (x_max - x_min)
    # 端点精确为 0 和 1
    scaled = np.clip(scaled, 0.0, 1.0)
    return scaled.tolist(), x_min, x_max


def truncate2(scaled: Sequence[float]) -> List[float]:
    """
    向下截断到两位小数：结果是不大于输入的最大 0.01 网格点

    arr*100 的舍入误差可能偏离一格（0.29*100 = 28.999999999999996），
    直接与网格点 k/100 比较后校正
    """
    arr = np.asarray(scaled, dtype=float)
    hundredths = np.floor(arr * 100.0)
    hundredths = np.where((hundredths + 1.0) / 100.0 <= arr, hundredths + 1.0, hundredths)
    hundredths = np.where(hundredths / 100.0 > arr, hundredths - 1.0, hundredths)
    return (hundredths / 100.0).tolist()


def inverse_rescale(scaled: Sequence[float], x_min: float, x_max: float) -> List[float]:
    """out[i] = x_min + scaled[i] * (x_max - x_min)"""
    arr = np.asarray(scaled, dtype=float)
    if x_max == x_min:
        return [float(x_min)] * len(arr)
    return (x_min + arr * (x_max - x_min)).tolist()


def compress(seg: SensorSegment, params: CompressionParams) -> CompressedSegment:
    """
    压缩一个片段

    plan_indices -> skip_sample -> rescale -> truncate2，
    x_min/x_max 在采样后的值上计算
    """
    validate_segment(seg)
    plan = plan_indices(seg.n_total, params.alpha)
    sampled = skip_sample(seg.values, plan)
    scaled, x_min, x_max = rescale(sampled)
    truncated = truncate2(scaled)

    PrometheusMetrics.record_compressed(seg.mode.value, seg.sensor.value)
    logger.debug(
        f"Compressed {seg.segment_id}: {seg.n_total} -> {plan.n_kept} points (alpha={params.alpha})"
    )

    return CompressedSegment(
        segment_id=seg.segment_id,
        mode=seg.mode,
        sensor=seg.sensor,
        alpha=params.alpha,
        n_total=seg.n_total,
        x_min=x_min,
        x_max=x_max,
        values_scaled=tuple(truncated),
    )


def compression_stats(seg: SensorSegment, cs: CompressedSegment) -> CompressionStats:
    """对比原始序列与压缩序列的点数和字符数"""
    original_chars = len(",".join(repr(float(v)) for v in seg.values))
    compressed_chars = len(",".join(f"{v:.2f}" for v in cs.values_scaled))
    return CompressionStats(
        n_total=cs.n_total,
        n_kept=cs.n_kept,
        original_chars=original_chars,
        compressed_chars=compressed_chars,
        point_ratio=cs.n_kept / cs.n_total,
        char_ratio=compressed_chars / original_chars if original_chars else 0.0,
    )
