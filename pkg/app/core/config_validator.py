"""
配置验证器 - 运行前验证LLM配置完整性

在 decompress / evaluate 发起任何请求之前检查 LlmConfig
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from dotenv import dotenv_values

from app.core.config import LlmConfig
from app.core.exceptions import ConfigurationException
from app.core.logging import logger

# 看起来像密钥的配置项（只允许出现在环境变量里）
_SECRET_MARKERS = ("KEY", "TOKEN", "SECRET", "PASSWORD")


class ConfigValidator:
    """
    配置验证器

    检查LLM后端所需的配置是否正确设置
    """

    @staticmethod
    def validate(
        cfg: LlmConfig,
        config_file: Optional[Union[str, Path]] = None
    ) -> Tuple[bool, List[str]]:
        """
        验证配置完整性

        Args:
            cfg: 待验证的LLM配置
            config_file: 配置来源文件（用于检查其中是否写了密钥）

        Returns:
            (is_valid, errors): 是否有效和错误/警告列表
        """
        errors: List[str] = []
        warnings: List[str] = []

        errors.extend(ConfigValidator._validate_backend_config(cfg))

        warnings.extend(ConfigValidator._collect_warnings(cfg))
        if config_file is not None:
            warnings.extend(ConfigValidator._scan_config_file(config_file))

        is_valid = len(errors) == 0

        if errors:
            logger.error(f"Configuration validation found {len(errors)} errors:")
            for error in errors:
                logger.error(f"  ✗ {error}")

        if warnings:
            logger.warning(f"Configuration validation found {len(warnings)} warnings:")
            for warning in warnings:
                logger.warning(f"  ⚠ {warning}")

        if is_valid and not warnings:
            logger.info("✓ Configuration validation passed")
        elif is_valid:
            logger.info("✓ Configuration validation passed with warnings")

        return is_valid, errors + [f"⚠ {w}" for w in warnings]

    @staticmethod
    def get_config_summary(cfg: LlmConfig) -> Dict[str, Any]:
        """
        获取配置摘要（用于诊断，不含密钥）
        """
        return {
            "backend": cfg.backend,
            "endpoint_url": cfg.endpoint_url,
            "model": cfg.model_name,
            "temperature": cfg.temperature,
            "max_retries": cfg.max_retries,
            "timeout_s": cfg.timeout_s,
            "api_key_env": cfg.api_key_env,
        }

    @staticmethod
    def _validate_backend_config(cfg: LlmConfig) -> List[str]:
        """验证后端相关配置"""
        errors = []

        if not cfg.model_name.strip():
            errors.append("LLM_MODEL_NAME must not be empty")

        if cfg.backend == "remote" and not cfg.endpoint_url.strip():
            errors.append("LLM_ENDPOINT_URL is required when LLM_BACKEND=remote")

        if cfg.backend == "mock_scripted":
            if not cfg.mock_script:
                errors.append("LLM_MOCK_SCRIPT is required when LLM_BACKEND=mock_scripted")
            elif not Path(cfg.mock_script).is_file():
                errors.append(f"LLM_MOCK_SCRIPT file not found: {cfg.mock_script}")

        return errors

    @staticmethod
    def _collect_warnings(cfg: LlmConfig) -> List[str]:
        warnings = []
        if cfg.temperature > 0:
            warnings.append(
                f"LLM_TEMPERATURE={cfg.temperature} - evaluation results will not be deterministic"
            )
        if cfg.backend == "remote" and cfg.endpoint_url.startswith("http://"):
            warnings.append("LLM_ENDPOINT_URL is not https - the API key is sent in clear text")
        return warnings

    @staticmethod
    def _scan_config_file(config_file: Union[str, Path]) -> List[str]:
        """配置文件中的密钥会被忽略，给出警告"""
        warnings = []
        path = Path(config_file)
        if not path.is_file():
            return warnings
        for key in dotenv_values(path):
            upper = key.upper()
            if upper == "LLM_API_KEY_ENV":
                continue
            if any(marker in upper for marker in _SECRET_MARKERS):
                warnings.append(
                    f"{key} looks like a secret inside {path.name} - it is ignored, "
                    f"set it in the environment instead"
                )
        return warnings

    @staticmethod
    def validate_and_raise(
        cfg: LlmConfig,
        config_file: Optional[Union[str, Path]] = None
    ) -> None:
        """验证配置并在失败时抛出异常"""
        is_valid, messages = ConfigValidator.validate(cfg, config_file)
        if not is_valid:
            # 只包含错误，不包含警告
            errors = [m for m in messages if not m.startswith("⚠")]
            if errors:
                error_msg = "Configuration validation failed:\n" + "\n".join(f"  - {e}" for e in errors)
                raise ConfigurationException(error_msg, details={"errors": errors})
