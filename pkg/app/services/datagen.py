"""
合成传感器数据生成器

为 bus / taxi / mtr 生成类真实的 速度 / 海拔 / 气压 片段。
随机数使用 numpy 的 PCG64（SeedSequence 派生子流），跨平台可复现：
  流 0: 速度    流 1: 海拔轨迹    流 2: 气压噪声
同一 (mode, seed) 的海拔和气压共用同一条海拔轨迹。
"""
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence

from app.core.config import settings
from app.core.exceptions import NonPositiveRateException, ValidationException
from app.core.logging import get_logger
from app.models.sensor import SensorKind, SensorSegment, TransportMode

logger = get_logger(__name__)

SEA_LEVEL_HPA = 1013.25
# 海平面附近每 hPa 约 8.43 m
METERS_PER_HPA = 8.43

_STREAM_SPEED = 0
_STREAM_ALTITUDE = 1
_STREAM_BAROMETER = 2


@dataclass(frozen=True)
class SpeedProfile:
    """速度曲线参数（分段恒定加速度）"""
    max_accel: float          # m/s²
    min_phase_s: int
    max_phase_s: int
    noise: float              # 均匀噪声幅度 m/s
    v_max: float              # m/s
    p_accel: float
    p_cruise: float


SPEED_PROFILES: Dict[TransportMode, SpeedProfile] = {
    # 地铁：阶段长、加速度小、以匀速为主
    TransportMode.MTR: SpeedProfile(1.0, 8, 20, 0.05, 25.0, 0.2, 0.6),
    TransportMode.BUS: SpeedProfile(1.5, 4, 12, 0.3, 16.0, 0.35, 0.3),
    TransportMode.TAXI: SpeedProfile(2.0, 3, 8, 0.5, 22.0, 0.4, 0.2),
}


def _entropy(seed: int) -> int:
    # SeedSequence 只接受非负整数；负种子按 2**64 取模
    return int(seed) % 2**64


def _rng(seed: int, mode: TransportMode, stream: int) -> Generator:
    return Generator(PCG64(SeedSequence([_entropy(seed), mode.order, stream])))


def _n_samples(duration_s: int, rate_hz: float) -> int:
    if not rate_hz > 0:
        raise NonPositiveRateException(rate_hz)
    n = int(round(duration_s * rate_hz))
    if n < 2:
        raise ValidationException(
            f"duration_s * rate_hz must give at least 2 samples, got {n}",
            code="segment_too_short",
            details={"duration_s": duration_s, "rate_hz": rate_hz},
        )
    return n


def _ar1(rng: Generator, n: int, sigma: float, phi: float = 0.8) -> np.ndarray:
    """平稳 AR(1) 有色噪声"""
    noise = np.empty(n)
    noise[0] = rng.normal(0.0, sigma)
    innovation = sigma * np.sqrt(1.0 - phi * phi)
    for i in range(1, n):
        noise[i] = phi * noise[i - 1] + rng.normal(0.0, innovation)
    return noise


def _speed(mode: TransportMode, seed: int, n: int, rate_hz: float) -> np.ndarray:
    """停车 / 加速 / 匀速 / 制动 阶段组成的速度曲线"""
    profile = SPEED_PROFILES[mode]
    rng = _rng(seed, mode, _STREAM_SPEED)
    dt = 1.0 / rate_hz

    accel = np.empty(n)
    filled = 0
    while filled < n:
        phase_len = int(round(rng.integers(profile.min_phase_s, profile.max_phase_s + 1) * rate_hz))
        phase_len = max(1, phase_len)
        draw = rng.random()
        if draw < profile.p_accel:
            a = rng.uniform(0.3, profile.max_accel)
        elif draw < profile.p_accel + profile.p_cruise:
            a = 0.0
        else:
            a = -rng.uniform(0.3, profile.max_accel)
        accel[filled:filled + phase_len] = a
        filled += phase_len

    v = np.empty(n)
    v[0] = rng.uniform(0.0, 0.8 * profile.v_max)
    for i in range(1, n):
        # 停车后保持为 0；不超过最高速度
        v[i] = min(max(v[i - 1] + accel[i] * dt, 0.0), profile.v_max)

    observed = v + rng.uniform(-profile.noise, profile.noise, size=n)
    return np.clip(observed, 0.0, None)


def _altitude(mode: TransportMode, seed: int, n: int, rate_hz: float) -> np.ndarray:
    """海拔轨迹：道路为平缓坡度（±10 m），地铁近乎水平，偶有进站坡段"""
    rng = _rng(seed, mode, _STREAM_ALTITUDE)
    t = np.arange(n) / rate_hz
    duration = max(t[-1], 1.0)
    u = t / duration

    if mode == TransportMode.MTR:
        base = rng.uniform(-30.0, 40.0)
        trend = rng.uniform(-0.5, 0.5) * u
        if rng.random() < 0.4:
            step = rng.uniform(-4.0, 4.0)
            center = rng.uniform(0.2, 0.8) * duration
            trend = trend + 0.5 * step * (1.0 + np.tanh((t - center) / 3.0))
        sigma = 0.1
    else:
        base = rng.uniform(0.0, 200.0)
        grade = rng.uniform(-6.0, 6.0)
        wave = rng.uniform(-4.0, 4.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        trend = grade * u + wave * (np.sin(np.pi * u + phase) - np.sin(phase))
        sigma = 0.3

    return base + trend + _ar1(rng, n, sigma)


def _barometer(mode: TransportMode, seed: int, n: int, rate_hz: float) -> np.ndarray:
    """气压 = 1013.25 + 天气偏移 − 海拔/8.43 + 小幅有色噪声"""
    altitude = _altitude(mode, seed, n, rate_hz)
    rng = _rng(seed, mode, _STREAM_BAROMETER)
    weather = rng.uniform(-3.0, 3.0)
    return SEA_LEVEL_HPA + weather - altitude / METERS_PER_HPA + _ar1(rng, n, 0.02)


def generate_segment(
    mode: TransportMode,
    sensor: SensorKind,
    seed: int,
    duration_s: Optional[int] = None,
    rate_hz: Optional[float] = None,
    segment_id: Optional[str] = None,
) -> SensorSegment:
    """
    生成一个片段

    Args:
        mode: 交通方式
        sensor: 传感器类型
        seed: 随机种子
        duration_s: 时长（秒），默认 settings.DATAGEN_DURATION_S
        rate_hz: 采样率，默认 settings.DATAGEN_RATE_HZ
        segment_id: 片段ID，默认 "{mode}-{sensor}-{seed}"

    Returns:
        SensorSegment，长度 = duration_s * rate_hz
    """
    duration_s = settings.DATAGEN_DURATION_S if duration_s is None else duration_s
    rate_hz = settings.DATAGEN_RATE_HZ if rate_hz is None else rate_hz
    n = _n_samples(duration_s, rate_hz)

    if sensor == SensorKind.SPEED:
        values = _speed(mode, seed, n, rate_hz)
    elif sensor == SensorKind.ALTITUDE:
        values = _altitude(mode, seed, n, rate_hz)
    else:
        values = _barometer(mode, seed, n, rate_hz)

    return SensorSegment(
        segment_id=segment_id or f"{mode.value}-{sensor.value}-{seed}",
        mode=mode,
        sensor=sensor,
        sample_rate_hz=rate_hz,
        values=tuple(values.tolist()),
    )


def segment_seed(seed: int, index: int) -> int:
    """数据集种子 + 序号 -> 片段种子"""
    return int(SeedSequence([_entropy(seed), index]).generate_state(1)[0])


def generate_dataset(
    seed: int,
    segments_per_mode: Optional[int] = None,
    duration_s: Optional[int] = None,
    rate_hz: Optional[float] = None,
) -> List[SensorSegment]:
    """
    生成完整数据集：3 种交通方式 × 3 种传感器 × segments_per_mode

    ID 为 "{mode}-{sensor}-{index}"；同一 index 的海拔与气压来自同一段行程
    """
    if segments_per_mode is None:
        segments_per_mode = settings.DATAGEN_SEGMENTS_PER_MODE
    if segments_per_mode < 1:
        raise ValidationException(
            f"segments_per_mode must be >= 1, got {segments_per_mode}",
            code="bad_segment_count",
        )

    segments = []
    for mode in TransportMode:
        for sensor in SensorKind:
            for index in range(segments_per_mode):
                segments.append(generate_segment(
                    mode, sensor, segment_seed(seed, index),
                    duration_s=duration_s,
                    rate_hz=rate_hz,
                    segment_id=f"{mode.value}-{sensor.value}-{index}",
                ))

    logger.info(f"Generated {len(segments)} synthetic segments (seed={seed})")
    return segments
