"""
Pytest配置文件和共享fixtures
"""
import json
from pathlib import Path
from typing import Callable, List

import pytest

from app.core.config import LlmConfig, settings
from app.models.sensor import CompressedSegment, CompressionParams, SensorKind, SensorSegment, TransportMode
from app.services.codec import compress

FIXTURES_DIR = Path(__file__).parent / "fixtures"


def make_segment(
    values,
    mode: TransportMode = TransportMode.TAXI,
    sensor: SensorKind = SensorKind.BAROMETER,
    segment_id: str = "seg-0",
    rate_hz: float = 1.0,
) -> SensorSegment:
    """构造测试片段"""
    return SensorSegment(
        segment_id=segment_id,
        mode=mode,
        sensor=sensor,
        sample_rate_hz=rate_hz,
        values=tuple(float(v) for v in values),
    )


@pytest.fixture
def ramp_segment() -> SensorSegment:
    """0..29 线性斜坡"""
    return make_segment(range(30), segment_id="ramp")


@pytest.fixture
def constant_segment() -> SensorSegment:
    """常数片段"""
    return make_segment([7.0] * 30, segment_id="flat")


@pytest.fixture
def compressed_factory() -> Callable[..., CompressedSegment]:
    """按 α 压缩任意值序列"""
    def _factory(values, alpha: float = 0.5, **kwargs) -> CompressedSegment:
        return compress(make_segment(values, **kwargs), CompressionParams(alpha=alpha))
    return _factory


@pytest.fixture
def fast_llm_config() -> LlmConfig:
    """无退避等待的mock配置"""
    return LlmConfig(backend="mock_interpolating", backoff_base_s=0.0, max_retries=3)


@pytest.fixture
def no_sleep(monkeypatch) -> List[float]:
    """记录重试等待时间而不真正等待"""
    delays: List[float] = []

    async def fake_sleep(delay: float) -> None:
        delays.append(delay)

    monkeypatch.setattr("app.core.retry.asyncio.sleep", fake_sleep)
    return delays


@pytest.fixture
def script_file(tmp_path) -> Callable[[list], Path]:
    """把回复列表写成脚本mock文件"""
    def _write(entries: list) -> Path:
        path = tmp_path / "script.json"
        path.write_text(json.dumps(entries), encoding="utf-8")
        return path
    return _write


# 环境变量覆盖用于测试
@pytest.fixture(autouse=True)
def override_settings():
    """覆盖测试环境的配置"""
    original_values = {}

    test_overrides = {
        'LOG_LEVEL': 'ERROR',
        'LLM_MOCK_RESTATE_INPUT': False,
    }

    for key, value in test_overrides.items():
        original_values[key] = getattr(settings, key)
        setattr(settings, key, value)

    yield

    for key, value in original_values.items():
        setattr(settings, key, value)
