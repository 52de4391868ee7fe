"""
异常层次测试
"""
import pytest

from app.core.exceptions import (
    AppException,
    BadAlphaException,
    BadMockScriptException,
    ConfigurationException,
    EmptyReplyException,
    HttpStatusException,
    LLMException,
    MissingApiKeyException,
    NonFiniteValueException,
    ParseException,
    ReplyLengthMismatchException,
    RetriesExhaustedException,
    StorageException,
    TimeoutException,
    TransportException,
    ValidationException,
)


class TestExitCodes:
    """测试退出码映射"""

    @pytest.mark.parametrize("exc, code", [
        (BadAlphaException(1.5), 2),
        (NonFiniteValueException(3), 2),
        (MissingApiKeyException("LLM_API_KEY"), 2),
        (BadMockScriptException("exhausted"), 2),
        (StorageException("disk full", path="/tmp/x"), 3),
        (RetriesExhaustedException(4, TimeoutException(1.0)), 5),
    ])
    def test_exit_code(self, exc, code):
        assert exc.exit_code == code

    def test_families(self):
        """测试继承关系"""
        assert isinstance(BadAlphaException(0), ValidationException)
        assert isinstance(MissingApiKeyException("X"), ConfigurationException)
        assert isinstance(ReplyLengthMismatchException(2, 3), ParseException)
        assert isinstance(EmptyReplyException(), LLMException)
        assert all(isinstance(e, AppException) for e in (StorageException("x"), EmptyReplyException()))


class TestRetryable:
    """测试可重试标记"""

    def test_transient_errors(self):
        assert TimeoutException(1.0).retryable
        assert TransportException("reset").retryable
        assert EmptyReplyException().retryable

    @pytest.mark.parametrize("status, retryable", [
        (429, True), (500, True), (503, True), (400, False), (401, False), (404, False),
    ])
    def test_http_status(self, status, retryable):
        assert HttpStatusException(status).retryable is retryable

    def test_exhausted_is_final(self):
        assert RetriesExhaustedException(3).retryable is False


class TestToDict:
    """测试序列化"""

    def test_details_included(self):
        data = ReplyLengthMismatchException(2, 3).to_dict()
        assert data["code"] == "length_mismatch"
        assert data["details"] == {"found": 2, "expected": 3}

    def test_retries_exhausted_details(self):
        exc = RetriesExhaustedException(3, TransportException("reset"))
        assert exc.attempts == 3
        assert exc.to_dict()["details"]["last_error"] == "TransportException"
