"""
LLM后端工厂 - 支持远程chat-completions端点和两种mock

提供统一的后端创建接口：
- remote: chat-completions 风格的 HTTPS 端点（httpx）
- mock_interpolating: 从提示中取出压缩序列，线性插值后包上噪声文本返回
- mock_scripted: 按顺序回放脚本文件里的回复或错误
"""
import hashlib
import json
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Protocol, Sequence, Union

import httpx
import numpy as np

from app.core.config import LlmConfig, settings
from app.core.exceptions import (
    BadMockScriptException,
    HttpStatusException,
    MissingApiKeyException,
    NoNumbersFoundException,
    TimeoutException,
    TransportException,
    UnknownBackendException,
)
from app.core.logging import get_logger
from app.models.llm import to_messages
from app.models.prompt import PromptBundle
from app.services.codec import spread_indices
from app.services.parser import longest_numeric_run

logger = get_logger(__name__)

SUPPORTED_BACKENDS = ["remote", "mock_interpolating", "mock_scripted"]


class ChatBackend(Protocol):
    """后端句柄：可在并发任务间共享"""

    name: str

    async def chat(self, bundle: PromptBundle) -> str:
        ...

    async def aclose(self) -> None:
        ...


# =============================================================================
# 远程后端
# =============================================================================

class RemoteChatBackend:
    """
    chat-completions 风格的远程后端

    请求: {"model", "temperature", "messages": [{"role", "content"}]}
    回复: choices[0].message.content
    """

    name = "remote"

    def __init__(self, cfg: LlmConfig, transport: Optional[httpx.AsyncBaseTransport] = None):
        api_key = os.environ.get(cfg.api_key_env, "").strip()
        if not api_key:
            raise MissingApiKeyException(cfg.api_key_env)
        self.cfg = cfg
        self._client = httpx.AsyncClient(
            timeout=cfg.timeout_s,
            transport=transport,
            headers={"Authorization": f"Bearer {api_key}"},
        )
        logger.info(f"Creating remote LLM backend: {cfg.model_name} at {cfg.endpoint_url}")

    def _payload(self, bundle: PromptBundle) -> Dict[str, Any]:
        return {
            "model": self.cfg.model_name,
            "temperature": self.cfg.temperature,
            "messages": [m.model_dump() for m in to_messages(bundle)],
        }

    async def chat(self, bundle: PromptBundle) -> str:
        try:
            response = await self._client.post(self.cfg.endpoint_url, json=self._payload(bundle))
        except httpx.TimeoutException as e:
            raise TimeoutException(self.cfg.timeout_s) from e
        except httpx.TransportError as e:
            raise TransportException(str(e) or type(e).__name__) from e

        if not response.is_success:
            raise HttpStatusException(response.status_code, response.text)

        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise TransportException(f"malformed reply body: {e}") from e
        return content or ""

    async def aclose(self) -> None:
        await self._client.aclose()


# =============================================================================
# 插值mock
# =============================================================================

_PREFIXES = [
    "",
    "Sure! Here is the decompressed sequence:\n",
    "Decompressed data:\n",
    "```\n",
]
_SUFFIXES = [
    "",
    "\nLet me know if you need anything else.",
    " Hope this helps!",
    "\n```",
]
_BRACKETS = [("[", "]"), ("(", ")"), ("", "")]
_SEPARATORS = [", ", " ", "; ", "\n", ","]


def _prompt_seed(text: str) -> int:
    return int(hashlib.sha256(text.encode("utf-8")).hexdigest()[:8], 16)


def render_full_precision(value: float) -> str:
    """最短往返表示，至少两位小数"""
    text = repr(float(value))
    if "e" in text or "E" in text:
        return text
    whole, _, frac = text.partition(".")
    return f"{whole}.{frac.ljust(2, '0')}"


def interpolate_run(run: Sequence[float], expected_length: int) -> List[float]:
    """把 run 均匀放到 expected_length 个位置上并线性插值"""
    anchors = spread_indices(expected_length, len(run))
    return np.interp(np.arange(expected_length), anchors, np.asarray(run, dtype=float)).tolist()


class InterpolatingMockBackend:
    """
    插值mock

    结果与线性插值基线完全一致；回复的包装（前后缀、括号、分隔符）
    由提示文本的哈希决定，保证确定性
    """

    name = "mock_interpolating"

    def __init__(self, noise: bool = True, restate_input: Optional[bool] = None):
        self.noise = noise
        self.restate_input = settings.LLM_MOCK_RESTATE_INPUT if restate_input is None else restate_input

    def render(self, values: Sequence[float], user_text: str, restated: Sequence[float] = ()) -> str:
        if not self.noise:
            return "[" + ", ".join(render_full_precision(v) for v in values) + "]"

        seed = _prompt_seed(user_text)
        prefix = _PREFIXES[seed % len(_PREFIXES)]
        seed //= len(_PREFIXES)
        suffix = _SUFFIXES[seed % len(_SUFFIXES)]
        seed //= len(_SUFFIXES)
        open_b, close_b = _BRACKETS[seed % len(_BRACKETS)]
        seed //= len(_BRACKETS)
        sep = _SEPARATORS[seed % len(_SEPARATORS)]

        body = open_b + sep.join(render_full_precision(v) for v in values) + close_b
        if restated:
            echo = "[" + ", ".join(f"{v:.2f}" for v in restated) + "]"
            prefix = f"The input was {echo}.\n" + prefix
        return prefix + body + suffix

    async def chat(self, bundle: PromptBundle) -> str:
        try:
            run = longest_numeric_run(bundle.user_text)
        except NoNumbersFoundException:
            return "I could not find a sequence to decompress."
        if not 2 <= len(run) <= bundle.expected_length:
            return "I could not find a sequence to decompress."
        values = interpolate_run(run, bundle.expected_length)
        return self.render(values, bundle.user_text, run if self.restate_input else ())

    async def aclose(self) -> None:
        return None


# =============================================================================
# 脚本mock
# =============================================================================

_SCRIPT_ERRORS = {"timeout", "transport", "empty", "http"}


def _check_script(script: Any) -> List[Union[str, Dict[str, Any]]]:
    if not isinstance(script, list):
        raise BadMockScriptException("script must be a JSON array")
    for i, item in enumerate(script):
        if isinstance(item, str):
            continue
        if not isinstance(item, dict) or item.get("error") not in _SCRIPT_ERRORS:
            raise BadMockScriptException(f"entry {i} must be a string or an error object")
        if item["error"] == "http" and not isinstance(item.get("status"), int):
            raise BadMockScriptException(f"entry {i} needs an integer 'status'")
    return script


def load_script(path: Union[str, Path]) -> List[Union[str, Dict[str, Any]]]:
    """读取脚本文件（JSON数组）"""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise BadMockScriptException(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise BadMockScriptException(f"invalid JSON in {path}: {e}") from e
    return _check_script(data)


class ScriptedMockBackend:
    """按顺序回放脚本中的回复；脚本耗尽后抛出 BadMockScriptException"""

    name = "mock_scripted"

    def __init__(self, script: Sequence[Union[str, Dict[str, Any]]]):
        self.script = _check_script(list(script) if isinstance(script, tuple) else script)
        self.calls = 0

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ScriptedMockBackend":
        return cls(load_script(path))

    async def chat(self, bundle: PromptBundle) -> str:
        if self.calls >= len(self.script):
            raise BadMockScriptException(f"script exhausted after {len(self.script)} replies")
        item = self.script[self.calls]
        self.calls += 1

        if isinstance(item, str):
            return item
        error = item["error"]
        if error == "timeout":
            raise TimeoutException(None)
        if error == "transport":
            raise TransportException("scripted connection failure")
        if error == "http":
            raise HttpStatusException(item["status"], item.get("body", ""))
        return ""

    async def aclose(self) -> None:
        return None


class LLMProviderFactory:
    """
    LLM后端工厂类
    """

    @staticmethod
    def create_backend(
        kind: str,
        cfg: Optional[LlmConfig] = None,
        transport: Optional[httpx.AsyncBaseTransport] = None,
    ) -> ChatBackend:
        """
        创建后端实例

        Args:
            kind: remote / mock_interpolating / mock_scripted
            cfg: LLM配置（默认从环境加载）
            transport: 可选的httpx传输层（测试用 MockTransport）

        Raises:
            UnknownBackendException: 未知后端
            MissingApiKeyException: remote 后端缺少密钥
            BadMockScriptException: 脚本缺失或无效
        """
        cfg = cfg or LlmConfig()
        if kind == "remote":
            return RemoteChatBackend(cfg, transport=transport)
        if kind == "mock_interpolating":
            logger.info("Creating interpolating mock LLM backend")
            return InterpolatingMockBackend()
        if kind == "mock_scripted":
            if not cfg.mock_script:
                raise BadMockScriptException("LLM_MOCK_SCRIPT is not set")
            logger.info(f"Creating scripted mock LLM backend from {cfg.mock_script}")
            return ScriptedMockBackend.from_file(cfg.mock_script)
        raise UnknownBackendException(kind, SUPPORTED_BACKENDS)


def make_backend(
    kind: str,
    cfg: Optional[LlmConfig] = None,
    transport: Optional[httpx.AsyncBaseTransport] = None,
) -> ChatBackend:
    """LLMProviderFactory.create_backend 的便捷函数"""
    return LLMProviderFactory.create_backend(kind, cfg, transport)
