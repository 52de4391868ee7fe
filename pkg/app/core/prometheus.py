"""
Prometheus指标集成

使用独立的registry，CLI退出时可写入文本格式文件（--metrics-file）
"""
from pathlib import Path
from typing import Union
from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile
from app.core.logging import logger


registry = CollectorRegistry()

# LLM相关指标
llm_requests_total = Counter(
    'llm_requests_total',
    'Total LLM requests',
    ['backend', 'status'],
    registry=registry
)

llm_request_duration_seconds = Histogram(
    'llm_request_duration_seconds',
    'LLM request latency',
    ['backend'],
    registry=registry
)

llm_retries_total = Counter(
    'llm_retries_total',
    'Total LLM request retries',
    ['backend'],
    registry=registry
)

# 重建指标
reconstruction_fallbacks_total = Counter(
    'reconstruction_fallbacks_total',
    'Reconstructions that fell back to linear interpolation',
    ['reason'],
    registry=registry
)

parse_failures_total = Counter(
    'parse_failures_total',
    'LLM replies that could not be parsed',
    ['code'],
    registry=registry
)

# 压缩指标
segments_compressed_total = Counter(
    'segments_compressed_total',
    'Total compressed segments',
    ['mode', 'sensor'],
    registry=registry
)


class PrometheusMetrics:
    """Prometheus指标管理器"""

    @staticmethod
    def record_llm_request(backend: str, status: str, duration: float) -> None:
        """记录LLM请求"""
        llm_requests_total.labels(backend=backend, status=status).inc()
        llm_request_duration_seconds.labels(backend=backend).observe(duration)

    @staticmethod
    def record_llm_retry(backend: str) -> None:
        """记录LLM重试"""
        llm_retries_total.labels(backend=backend).inc()

    @staticmethod
    def record_fallback(reason: str) -> None:
        """记录回退到线性插值"""
        reconstruction_fallbacks_total.labels(reason=reason).inc()

    @staticmethod
    def record_parse_failure(code: str) -> None:
        """记录解析失败"""
        parse_failures_total.labels(code=code).inc()

    @staticmethod
    def record_compressed(mode: str, sensor: str) -> None:
        """记录压缩片段"""
        segments_compressed_total.labels(mode=mode, sensor=sensor).inc()

    @staticmethod
    def write_textfile(path: Union[str, Path]) -> None:
        """以文本格式导出全部指标"""
        try:
            write_to_textfile(str(path), registry)
            logger.debug(f"Metrics written to {path}")
        except OSError as e:
            logger.error(f"Error writing Prometheus metrics to {path}: {e}", exc_info=True)
