from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.exceptions import ConfigurationException


BackendKind = Literal["remote", "mock_interpolating", "mock_scripted"]


class Settings(BaseSettings):
    """
    应用配置类

    使用Pydantic Settings管理环境变量和配置
    覆盖压缩、重建、评估、数据生成等全局默认值
    """
    PROJECT_NAME: str = "LLM Sensor Codec"

    # Logging
    LOG_LEVEL: str = "INFO"

    # 重试配置（指数退避：base 1s，factor 2）
    RETRY_INITIAL_DELAY: float = 1.0
    RETRY_BACKOFF_FACTOR: float = 2.0
    RETRY_MAX_DELAY: float = 60.0

    # --- 评估配置 ---
    EVAL_PARALLELISM: int = 4  # 并发LLM请求上限
    EVAL_DEFAULT_ALPHAS: str = "0.5,0.7,0.9"

    # --- 合成数据配置 ---
    DATAGEN_SEGMENTS_PER_MODE: int = 30
    DATAGEN_DURATION_S: int = 30
    DATAGEN_RATE_HZ: float = 1.0

    # --- 解析配置 ---
    # 缩放空间 [0, 1] 周围的合理性区间
    PARSER_BAND_LOW: float = -0.5
    PARSER_BAND_HIGH: float = 1.5

    # mock_interpolating 是否在回复前复述输入序列（用于测试解析器）
    LLM_MOCK_RESTATE_INPUT: bool = False

    # 允许 Pydantic 读取 .env 文件
    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")

    @property
    def default_alphas(self) -> List[float]:
        """解析默认的 α 列表"""
        return [float(a) for a in self.EVAL_DEFAULT_ALPHAS.split(",") if a.strip()]


# 全局配置实例
settings = Settings()


class LlmConfig(BaseSettings):
    """
    单次运行的LLM配置

    从扁平的 key=value 文件加载（--llm-config），环境变量覆盖文件，
    命令行参数覆盖两者。API密钥永远不在配置里，只从 api_key_env 指定的环境变量读取。
    """
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    model_name: str = "gpt-4"
    temperature: float = Field(0.0, ge=0.0)
    max_retries: int = Field(3, ge=0, le=10)
    timeout_s: float = Field(60.0, gt=0.0)
    api_key_env: str = "LLM_API_KEY"

    backend: BackendKind = "remote"
    mock_script: Optional[str] = None
    # 退避参数默认取全局配置
    backoff_base_s: float = Field(default_factory=lambda: settings.RETRY_INITIAL_DELAY, ge=0.0)
    backoff_factor: float = Field(default_factory=lambda: settings.RETRY_BACKOFF_FACTOR, ge=1.0)

    model_config = SettingsConfigDict(
        env_prefix="LLM_",
        case_sensitive=False,
        extra="ignore",
        frozen=True,
    )

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None, **overrides) -> "LlmConfig":
        """
        加载配置

        Args:
            path: 可选的 key=value 配置文件
            **overrides: 命令行覆盖值（None 被忽略）

        Returns:
            LlmConfig实例

        Raises:
            ConfigurationException: 文件不存在，或取值非法
        """
        if path is not None and not Path(path).is_file():
            raise ConfigurationException(
                f"LLM config file not found: {path}",
                code="missing_config_file",
                details={"path": str(path)},
            )
        explicit = {k: v for k, v in overrides.items() if v is not None}
        try:
            return cls(_env_file=str(path) if path else None, **explicit)
        except ValidationError as e:
            errors = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
            raise ConfigurationException(
                "Invalid LLM configuration:\n" + "\n".join(f"  - {m}" for m in errors),
                code="invalid_llm_config",
                details={"errors": errors, "path": str(path) if path else None},
            ) from e
