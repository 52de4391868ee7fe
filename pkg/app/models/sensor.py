"""
传感器数据相关的Pydantic模型

定义原始片段、压缩参数和压缩后片段的数据结构
"""
import math
from enum import Enum
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from app.core.exceptions import (
    EmptySegmentException,
    NonFiniteValueException,
    NonPositiveRateException,
)


class TransportMode(str, Enum):
    """交通方式"""
    BUS = "bus"
    TAXI = "taxi"
    MTR = "mtr"

    @property
    def order(self) -> int:
        return list(TransportMode).index(self)


class SensorKind(str, Enum):
    """传感器类型，每种类型携带固定单位"""
    BAROMETER = "barometer"
    SPEED = "speed"
    ALTITUDE = "altitude"

    @property
    def unit(self) -> str:
        return _UNITS[self]

    @property
    def order(self) -> int:
        return list(SensorKind).index(self)


_UNITS = {
    SensorKind.BAROMETER: "hPa",
    SensorKind.SPEED: "m/s",
    SensorKind.ALTITUDE: "m",
}


class SensorSegment(BaseModel):
    """一段连续的传感器记录（物理单位）"""

    model_config = ConfigDict(frozen=True)

    segment_id: str = Field(..., min_length=1, description="调用方提供的不透明ID")
    mode: TransportMode
    sensor: SensorKind
    sample_rate_hz: float = Field(1.0, description="采样率")
    values: Tuple[float, ...] = Field(..., description="物理单位的读数")

    @property
    def n_total(self) -> int:
        return len(self.values)

    def timestamps(self) -> List[float]:
        """t_s = i / rate_hz"""
        return [i / self.sample_rate_hz for i in range(self.n_total)]


def validate_segment(seg: SensorSegment) -> SensorSegment:
    """
    检查片段不变量

    Args:
        seg: 待检查的片段

    Returns:
        原样返回的片段

    Raises:
        EmptySegmentException: values 为空
        NonFiniteValueException: 存在 NaN/inf（携带第一个位置）
        NonPositiveRateException: 采样率 <= 0
    """
    if not seg.values:
        raise EmptySegmentException(seg.segment_id)
    for index, value in enumerate(seg.values):
        if not math.isfinite(value):
            raise NonFiniteValueException(index, seg.segment_id)
    if not (seg.sample_rate_hz > 0 and math.isfinite(seg.sample_rate_hz)):
        raise NonPositiveRateException(seg.sample_rate_hz)
    return seg


class CompressionParams(BaseModel):
    """压缩参数：保留比例 α ∈ (0, 1]"""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., gt=0.0, le=1.0)


def _on_hundredths_grid(value: float) -> bool:
    return abs(round(value * 100) / 100 - value) < 1e-12


class CompressedSegment(BaseModel):
    """
    压缩后的片段

    values_scaled 为两位小数的缩放值；保留的下标不存储，
    由 (alpha, n_total) 确定性地重新计算
    """

    model_config = ConfigDict(frozen=True)

    segment_id: str
    mode: TransportMode
    sensor: SensorKind
    alpha: float = Field(..., gt=0.0, le=1.0)
    n_total: int = Field(..., ge=2)
    x_min: float
    x_max: float
    values_scaled: Tuple[float, ...]

    @field_validator("values_scaled", mode="before")
    @classmethod
    def _parse_scaled(cls, v):
        # 线上格式为两位小数字符串
        return tuple(float(x) for x in v)

    @field_serializer("values_scaled")
    def _serialize_scaled(self, values: Tuple[float, ...]) -> List[str]:
        return [f"{x:.2f}" for x in values]

    @model_validator(mode="after")
    def _check_invariants(self) -> "CompressedSegment":
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("x_min and x_max must be finite")
        if self.x_min > self.x_max:
            raise ValueError(f"x_min {self.x_min} > x_max {self.x_max}")
        expected = max(2, math.floor(self.alpha * self.n_total))
        if len(self.values_scaled) != expected:
            raise ValueError(
                f"values_scaled has {len(self.values_scaled)} values, "
                f"expected {expected} for alpha={self.alpha}, n_total={self.n_total}"
            )
        for i, v in enumerate(self.values_scaled):
            if not (0.0 <= v <= 1.0) or not _on_hundredths_grid(v):
                raise ValueError(f"values_scaled[{i}]={v} is not a 2-decimal value in [0, 1]")
        return self

    @property
    def n_kept(self) -> int:
        return len(self.values_scaled)
