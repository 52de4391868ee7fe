"""
重建与评估相关的Pydantic模型
"""
import math
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.sensor import SensorKind, TransportMode

# 重建后端标签
BACKEND_TAGS = ("llm", "linear", "zoh", "spline")


class ReconstructionResult(BaseModel):
    """一个片段的重建结果（物理单位）"""

    model_config = ConfigDict(frozen=True)

    segment_id: str
    backend: str = Field(..., description="llm / linear / zoh / spline")
    values: Tuple[float, ...]
    retries_used: int = Field(0, ge=0)
    fell_back: bool = False
    raw_reply: Optional[str] = Field(None, description="LLM原始回复，留作审计")

    @model_validator(mode="after")
    def _check_finite(self) -> "ReconstructionResult":
        for i, v in enumerate(self.values):
            if not math.isfinite(v):
                raise ValueError(f"values[{i}] is not finite")
        return self


class EvaluationRecord(BaseModel):
    """每个 (mode, sensor, alpha, backend) 组合的聚合指标"""

    model_config = ConfigDict(frozen=True)

    mode: TransportMode
    sensor: SensorKind
    alpha: float
    backend: str
    mse: float = Field(..., ge=0.0)
    rmse: float = Field(..., ge=0.0)
    accuracy_pct: float = Field(..., ge=0.0, le=100.0)
    n_segments: int = Field(..., gt=0)
    n_fell_back: int = Field(0, ge=0, exclude=True)

    def sort_key(self) -> Tuple[int, int, float, str]:
        return (self.mode.order, self.sensor.order, self.alpha, self.backend)


class CompressionStats(BaseModel):
    """压缩前后的数据量对比"""

    model_config = ConfigDict(frozen=True)

    n_total: int
    n_kept: int
    original_chars: int
    compressed_chars: int
    point_ratio: float
    char_ratio: float
