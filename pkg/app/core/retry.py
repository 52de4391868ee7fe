"""
重试机制

LLM调用的指数退避：第 k 次重试前等待 min(base·factor^(k-1), max_delay) 秒。
异常通过 retryable 属性声明自己是否为瞬时错误
"""
import asyncio
from dataclasses import dataclass
from typing import Awaitable, Callable, List, Optional, Tuple, Type, TypeVar

from app.core.exceptions import LLMException, RetriesExhaustedException
from app.core.logging import get_logger

logger = get_logger(__name__)

T = TypeVar('T')

RetryHook = Callable[[Exception, int, float], None]


@dataclass(frozen=True)
class BackoffPolicy:
    """
    退避策略

    Attributes:
        max_retries: 首次调用之后最多再试几次
        base_delay: 第一次重试前的等待（秒），0 表示不等待
        factor: 每次重试的放大倍数
        max_delay: 单次等待上限（秒）
    """
    max_retries: int = 3
    base_delay: float = 1.0
    factor: float = 2.0
    max_delay: float = 60.0

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")
        if self.base_delay < 0:
            raise ValueError("base_delay must be non-negative")
        if self.max_delay < self.base_delay:
            raise ValueError("max_delay must be >= base_delay")
        if self.factor < 1:
            raise ValueError("factor must be >= 1")

    def delay(self, retry_number: int) -> float:
        """第 retry_number 次重试（从1计）前的等待时间"""
        return min(self.base_delay * self.factor ** (retry_number - 1), self.max_delay)

    def delays(self) -> List[float]:
        return [self.delay(n) for n in range(1, self.max_retries + 1)]


def is_retryable(error: Exception) -> bool:
    return bool(getattr(error, "retryable", False))


async def call_with_retry(
    func: Callable[[], Awaitable[T]],
    policy: BackoffPolicy,
    retry_on: Tuple[Type[Exception], ...] = (LLMException,),
    on_retry: Optional[RetryHook] = None,
) -> Tuple[T, int]:
    """
    按退避策略调用 func

    Args:
        func: 无参协程工厂，每次尝试调用一次
        policy: 退避策略
        retry_on: 参与重试判断的异常类型
        on_retry: 每次重试前的回调 (error, retry_number, delay)

    Returns:
        (结果, 成功时的尝试序号，从1计)

    Raises:
        RetriesExhaustedException: 瞬时错误持续到 max_retries 用完
        其他异常: retryable=False 的错误原样抛出，不再重试
    """
    attempt = 0
    while True:
        attempt += 1
        try:
            return await func(), attempt
        except retry_on as e:
            if not is_retryable(e):
                raise
            if attempt > policy.max_retries:
                logger.error(f"Giving up after {attempt} attempts: {type(e).__name__}: {e}")
                raise RetriesExhaustedException(attempt, e) from e

            wait = policy.delay(attempt)
            if on_retry:
                on_retry(e, attempt, wait)
            else:
                logger.warning(f"Retry {attempt}/{policy.max_retries} in {wait:.2f}s: {type(e).__name__}: {e}")
            await asyncio.sleep(wait)
