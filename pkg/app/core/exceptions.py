"""
自定义异常

提供统一的异常层次结构，每个异常携带稳定的错误代码和CLI退出码
"""
from typing import Any, Dict, Optional


class AppException(Exception):
    """
    应用自定义异常基类

    所有自定义异常都应继承此类
    """
    def __init__(
        self,
        message: str,
        code: str = "app_error",
        exit_code: int = 1,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.code = code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """转换为字典格式"""
        result = {
            "error": self.message,
            "code": self.code
        }
        if self.details:
            result["details"] = self.details
        return result


# =============================================================================
# 输入验证（退出码 2）
# =============================================================================

class ValidationException(AppException):
    """验证异常 - 用于输入数据或参数验证失败"""
    def __init__(
        self,
        message: str,
        code: str = "validation_error",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, code=code, exit_code=2, details=details)


class EmptySegmentException(ValidationException):
    """传感器片段为空"""
    def __init__(self, segment_id: Optional[str] = None):
        super().__init__(
            f"Segment '{segment_id}' has no values" if segment_id else "Segment has no values",
            code="empty_segment",
            details={"segment_id": segment_id}
        )


class NonFiniteValueException(ValidationException):
    """片段中存在NaN或无穷值"""
    def __init__(self, index: int, segment_id: Optional[str] = None):
        super().__init__(
            f"Non-finite value at index {index}",
            code="non_finite_value",
            details={"index": index, "segment_id": segment_id}
        )
        self.index = index


class NonPositiveRateException(ValidationException):
    """采样率必须为正"""
    def __init__(self, rate: float):
        super().__init__(
            f"Sample rate must be positive, got {rate}",
            code="non_positive_rate",
            details={"sample_rate_hz": rate}
        )


class SegmentTooShortException(ValidationException):
    """片段长度不足2"""
    def __init__(self, n_total: int):
        super().__init__(
            f"Segment needs at least 2 points, got {n_total}",
            code="segment_too_short",
            details={"n_total": n_total}
        )


class BadAlphaException(ValidationException):
    """压缩比 α 不在 (0, 1] 内"""
    def __init__(self, alpha: float):
        super().__init__(
            f"alpha must be in (0, 1], got {alpha}",
            code="bad_alpha",
            details={"alpha": alpha}
        )
        self.alpha = alpha


class LengthMismatchException(ValidationException):
    """序列长度不匹配"""
    def __init__(self, found: int, expected: int):
        super().__init__(
            f"Length mismatch: found {found}, expected {expected}",
            code="length_mismatch",
            details={"found": found, "expected": expected}
        )
        self.found = found
        self.expected = expected


class EmptyInputException(ValidationException):
    """输入为空"""
    def __init__(self, what: str = "input"):
        super().__init__(f"Empty {what}", code="empty_input", details={"what": what})


class TemplateSlotMissingException(ValidationException):
    """提示模板缺少必需占位符"""
    def __init__(self, slot: str):
        super().__init__(
            f"Prompt template is missing required slot {{{slot}}}",
            code="template_slot_missing",
            details={"slot": slot}
        )
        self.slot = slot


class UnknownTemplateSlotException(ValidationException):
    """提示模板包含未知占位符"""
    def __init__(self, slot: str):
        super().__init__(
            f"Prompt template uses unknown slot {{{slot}}}",
            code="unknown_template_slot",
            details={"slot": slot}
        )
        self.slot = slot


# =============================================================================
# 配置（退出码 2）
# =============================================================================

class ConfigurationException(AppException):
    """配置异常"""
    def __init__(
        self,
        message: str,
        code: str = "configuration_error",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, code=code, exit_code=2, details=details)


class MissingApiKeyException(ConfigurationException):
    """API密钥环境变量未设置"""
    def __init__(self, env_var: str):
        super().__init__(
            f"Environment variable '{env_var}' holding the API key is not set",
            code="missing_api_key",
            details={"env_var": env_var}
        )


class UnknownBackendException(ConfigurationException):
    """未知的后端类型"""
    def __init__(self, kind: str, supported: Optional[list] = None):
        super().__init__(
            f"Unknown backend: {kind}",
            code="unknown_backend",
            details={"backend": kind, "supported": supported or []}
        )


class BadMockScriptException(ConfigurationException):
    """脚本化mock后端的脚本无效或已耗尽"""
    def __init__(self, reason: str):
        super().__init__(f"Bad mock script: {reason}", code="bad_mock_script", details={"reason": reason})
        self.reason = reason


# =============================================================================
# 存储（退出码 3）
# =============================================================================

class StorageException(AppException):
    """文件读写失败"""
    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message, code="io_error", exit_code=3, details={"path": path})
        self.path = path


# =============================================================================
# 回复解析（由重建的回退策略吸收）
# =============================================================================

class ParseException(AppException):
    """LLM回复解析失败"""
    def __init__(self, message: str, code: str = "parse_error", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, code=code, exit_code=1, details=details)


class NoNumbersFoundException(ParseException):
    """回复中没有数字"""
    def __init__(self):
        super().__init__("No numbers found in reply", code="no_numbers_found")


class ReplyLengthMismatchException(ParseException):
    """回复中最长数字序列的长度与期望不符"""
    def __init__(self, found: int, expected: int):
        super().__init__(
            f"Reply length mismatch: found {found}, expected {expected}",
            code="length_mismatch",
            details={"found": found, "expected": expected}
        )
        self.found = found
        self.expected = expected


class OutOfBandException(ParseException):
    """解析出的数值超出合理区间"""
    def __init__(self, index: int, value: float):
        super().__init__(
            f"Value {value} at index {index} is outside the sanity band",
            code="out_of_band",
            details={"index": index, "value": value}
        )
        self.index = index
        self.value = value


# =============================================================================
# LLM 传输（退出码 5）
# =============================================================================

class LLMException(AppException):
    """LLM调用异常基类"""
    retryable: bool = False

    def __init__(self, message: str, code: str = "llm_error", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, code=code, exit_code=5, details=details)


class TimeoutException(LLMException):
    """请求超时"""
    retryable = True

    def __init__(self, timeout_s: Optional[float] = None):
        super().__init__(f"LLM request timed out after {timeout_s}s", code="timeout", details={"timeout_s": timeout_s})


class TransportException(LLMException):
    """网络连接失败"""
    retryable = True

    def __init__(self, message: str):
        super().__init__(f"LLM transport error: {message}", code="transport_error")


class HttpStatusException(LLMException):
    """非2xx响应"""
    def __init__(self, status_code: int, body: str = ""):
        super().__init__(
            f"LLM endpoint returned HTTP {status_code}",
            code="http_status",
            details={"status_code": status_code, "body": body[:500]}
        )
        self.status_code = status_code
        self.body = body
        # 429 和 5xx 为瞬时错误
        self.retryable = status_code == 429 or status_code >= 500


class EmptyReplyException(LLMException):
    """回复为空"""
    retryable = True

    def __init__(self):
        super().__init__("LLM returned an empty reply", code="empty_reply")


class RetriesExhaustedException(LLMException):
    """重试次数耗尽"""
    def __init__(self, attempts: int, last_error: Optional[Exception] = None):
        super().__init__(
            f"LLM request failed after {attempts} attempts: {last_error}",
            code="retries_exhausted",
            details={
                "attempts": attempts,
                "last_error": type(last_error).__name__ if last_error else None
            }
        )
        self.attempts = attempts
        self.last_error = last_error
