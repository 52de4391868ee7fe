"""
LLM调用服务

complete(): 发送 system + user 消息并返回第一条回复，
瞬时错误（超时、连接失败、空回复、429/5xx）按指数退避重试
"""
import time

from app.core.config import LlmConfig, settings
from app.core.exceptions import EmptyReplyException, LLMException
from app.core.logging import get_logger
from app.core.prometheus import PrometheusMetrics
from app.core.retry import BackoffPolicy, call_with_retry
from app.models.llm import ChatReply
from app.models.prompt import PromptBundle
from app.utils.llm_providers import ChatBackend

logger = get_logger(__name__)


def backoff_policy_for(cfg: LlmConfig) -> BackoffPolicy:
    """LlmConfig -> BackoffPolicy"""
    return BackoffPolicy(
        max_retries=cfg.max_retries,
        base_delay=cfg.backoff_base_s,
        factor=cfg.backoff_factor,
        max_delay=max(settings.RETRY_MAX_DELAY, cfg.backoff_base_s),
    )


async def complete(bundle: PromptBundle, cfg: LlmConfig, backend: ChatBackend) -> ChatReply:
    """
    调用LLM

    Args:
        bundle: 提示
        cfg: LLM配置（重试次数、退避参数）
        backend: 后端句柄

    Returns:
        ChatReply，attempt 为成功时的尝试序号

    Raises:
        RetriesExhaustedException: 可重试错误超过 max_retries
        HttpStatusException: 不可重试的HTTP状态（如 400/401）
        BadMockScriptException: 脚本mock耗尽
    """
    def on_retry(error: Exception, retry_number: int, delay: float) -> None:
        PrometheusMetrics.record_llm_retry(backend.name)
        logger.warning(
            f"LLM call failed ({type(error).__name__}: {error}), "
            f"retry {retry_number}/{cfg.max_retries} in {delay:.2f}s"
        )

    async def attempt_once() -> tuple:
        start = time.perf_counter()
        try:
            text = await backend.chat(bundle)
            if not text or not text.strip():
                raise EmptyReplyException()
        except LLMException as e:
            PrometheusMetrics.record_llm_request(backend.name, e.code, time.perf_counter() - start)
            raise
        elapsed = time.perf_counter() - start
        PrometheusMetrics.record_llm_request(backend.name, "success", elapsed)
        return text, elapsed

    (text, elapsed), attempt = await call_with_retry(attempt_once, backoff_policy_for(cfg), on_retry=on_retry)
    reply = ChatReply(text=text, latency_ms=elapsed * 1000.0, attempt=attempt)
    logger.debug(f"LLM reply received on attempt {reply.attempt} in {reply.latency_ms:.0f} ms")
    return reply
