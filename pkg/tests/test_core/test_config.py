"""
配置测试
"""
import pytest
from pydantic import ValidationError

from app.core.config import LlmConfig, settings
from app.core.config_validator import ConfigValidator
from app.core.exceptions import ConfigurationException


class TestSettings:
    """测试配置类"""

    def test_settings_load(self):
        """测试配置加载"""
        assert settings.PROJECT_NAME
        assert settings.LOG_LEVEL

    def test_default_alphas(self):
        """测试默认压缩比"""
        assert settings.default_alphas == [0.5, 0.7, 0.9]

    def test_retry_config(self):
        """测试重试配置"""
        assert settings.RETRY_INITIAL_DELAY >= 0
        assert settings.RETRY_BACKOFF_FACTOR >= 1
        assert settings.RETRY_MAX_DELAY >= settings.RETRY_INITIAL_DELAY

    def test_parser_band(self):
        """测试解析区间包含 [0, 1]"""
        assert settings.PARSER_BAND_LOW < 0 < 1 < settings.PARSER_BAND_HIGH


class TestLlmConfig:
    """测试LLM配置"""

    def test_defaults(self, monkeypatch):
        """测试默认值"""
        for var in ("LLM_MODEL_NAME", "LLM_TEMPERATURE", "LLM_MAX_RETRIES", "LLM_BACKEND"):
            monkeypatch.delenv(var, raising=False)
        cfg = LlmConfig()
        assert cfg.model_name == "gpt-4"
        assert cfg.temperature == 0.0
        assert cfg.max_retries == 3
        assert cfg.timeout_s == 60.0
        assert cfg.api_key_env == "LLM_API_KEY"
        assert cfg.backend == "remote"

    def test_load_from_file(self, tmp_path, monkeypatch):
        """测试从 key=value 文件加载"""
        monkeypatch.delenv("LLM_MODEL_NAME", raising=False)
        path = tmp_path / "llm.env"
        path.write_text("LLM_MODEL_NAME=gpt-4o\nLLM_MAX_RETRIES=5\n", encoding="utf-8")
        cfg = LlmConfig.load(path)
        assert cfg.model_name == "gpt-4o"
        assert cfg.max_retries == 5

    def test_env_overrides_file(self, tmp_path, monkeypatch):
        """测试环境变量覆盖文件"""
        path = tmp_path / "llm.env"
        path.write_text("LLM_MODEL_NAME=from-file\n", encoding="utf-8")
        monkeypatch.setenv("LLM_MODEL_NAME", "from-env")
        assert LlmConfig.load(path).model_name == "from-env"

    def test_cli_overrides_everything(self, tmp_path, monkeypatch):
        """测试命令行覆盖文件和环境变量，None 被忽略"""
        path = tmp_path / "llm.env"
        path.write_text("LLM_BACKEND=remote\n", encoding="utf-8")
        monkeypatch.setenv("LLM_BACKEND", "mock_scripted")
        cfg = LlmConfig.load(path, backend="mock_interpolating", model_name=None)
        assert cfg.backend == "mock_interpolating"
        assert cfg.model_name

    def test_invalid_values_rejected(self):
        """测试非法值"""
        with pytest.raises(ValidationError):
            LlmConfig(temperature=-0.1)
        with pytest.raises(ValidationError):
            LlmConfig(max_retries=11)
        with pytest.raises(ValidationError):
            LlmConfig(timeout_s=0)
        with pytest.raises(ValidationError):
            LlmConfig(backend="carrier-pigeon")

    def test_load_missing_file(self, tmp_path):
        """测试配置文件不存在"""
        with pytest.raises(ConfigurationException) as exc_info:
            LlmConfig.load(tmp_path / "lmm.env")
        assert exc_info.value.code == "missing_config_file"
        assert exc_info.value.exit_code == 2

    @pytest.mark.parametrize("line, field", [
        ("LLM_MAX_RETRIES=11", "max_retries"),
        ("LLM_TEMPERATURE=-1", "temperature"),
        ("LLM_BACKEND=carrier_pigeon", "backend"),
    ])
    def test_load_invalid_value(self, tmp_path, line, field):
        """测试文件中的非法值转换为配置异常"""
        path = tmp_path / "llm.env"
        path.write_text(line + "\n", encoding="utf-8")
        with pytest.raises(ConfigurationException) as exc_info:
            LlmConfig.load(path)
        assert exc_info.value.code == "invalid_llm_config"
        assert exc_info.value.exit_code == 2
        assert any(e.startswith(field) for e in exc_info.value.details["errors"])


class TestConfigValidator:
    """测试配置验证器"""

    def test_valid_config(self):
        """测试有效配置"""
        is_valid, messages = ConfigValidator.validate(LlmConfig(backend="mock_interpolating"))
        assert is_valid is True
        assert messages == []

    def test_empty_model_is_error(self):
        """测试空模型名"""
        is_valid, messages = ConfigValidator.validate(LlmConfig(model_name=" "))
        assert is_valid is False
        assert any("LLM_MODEL_NAME" in m for m in messages)

    def test_scripted_requires_script(self):
        """测试脚本mock缺少脚本"""
        is_valid, messages = ConfigValidator.validate(LlmConfig(backend="mock_scripted"))
        assert is_valid is False
        assert any("LLM_MOCK_SCRIPT" in m for m in messages)

    def test_temperature_warning(self):
        """测试非零温度只产生警告"""
        is_valid, messages = ConfigValidator.validate(
            LlmConfig(backend="mock_interpolating", temperature=0.7)
        )
        assert is_valid is True
        assert any(m.startswith("⚠") and "TEMPERATURE" in m for m in messages)

    def test_plain_http_warning(self):
        """测试非 https 端点警告"""
        _, messages = ConfigValidator.validate(LlmConfig(endpoint_url="http://localhost:8000/v1/chat/completions"))
        assert any("https" in m for m in messages)

    def test_secret_in_file_warning(self, tmp_path):
        """测试配置文件中写了密钥"""
        path = tmp_path / "llm.env"
        path.write_text("LLM_API_KEY=sk-123\nLLM_API_KEY_ENV=MY_KEY\n", encoding="utf-8")
        _, messages = ConfigValidator.validate(LlmConfig(backend="mock_interpolating"), path)
        secret_warnings = [m for m in messages if "secret" in m]
        assert len(secret_warnings) == 1
        assert "LLM_API_KEY " in secret_warnings[0]

    def test_validate_and_raise(self):
        """测试验证失败抛出异常"""
        with pytest.raises(ConfigurationException) as exc_info:
            ConfigValidator.validate_and_raise(LlmConfig(backend="mock_scripted"))
        assert exc_info.value.exit_code == 2

    def test_config_summary_has_no_secret(self, monkeypatch):
        """测试配置摘要不含密钥"""
        monkeypatch.setenv("LLM_API_KEY", "sk-secret")
        summary = ConfigValidator.get_config_summary(LlmConfig())
        assert "sk-secret" not in str(summary)
        assert summary["api_key_env"] == "LLM_API_KEY"
