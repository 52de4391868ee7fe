"""
磁盘格式

- 片段: 每个片段一个 `t_s,value` CSV + 同名 `.json` 元数据，目录下一个 manifest.json
- 压缩片段: JSONL，每行一个 CompressedSegment（values_scaled 为两位小数字符串）
- 其余 JSON 附属文件（provenance / stats）
"""
import json
import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd
from pydantic import ValidationError

from app.core.exceptions import EmptyInputException, StorageException, ValidationException
from app.core.logging import get_logger
from app.models.sensor import CompressedSegment, SensorKind, SensorSegment, TransportMode

logger = get_logger(__name__)

PathLike = Union[str, Path]

MANIFEST_NAME = "manifest.json"
CSV_COLUMNS = ["t_s", "value"]
_UNSAFE_CHARS = re.compile(r"[^A-Za-z0-9._-]")


def file_stem(segment_id: str) -> str:
    """片段ID -> 安全的文件名"""
    return _UNSAFE_CHARS.sub("_", segment_id)


def write_json(path: PathLike, payload: Any) -> None:
    try:
        Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    except OSError as e:
        raise StorageException(f"Cannot write {path}: {e}", path=str(path)) from e


def read_json(path: PathLike) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise StorageException(f"Cannot read {path}: {e}", path=str(path)) from e
    except json.JSONDecodeError as e:
        raise StorageException(f"Invalid JSON in {path}: {e}", path=str(path)) from e


def _ensure_dir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise StorageException(f"Cannot create directory {path}: {e}", path=str(path)) from e


def _sidecar(seg: SensorSegment) -> Dict[str, Any]:
    return {
        "segment_id": seg.segment_id,
        "mode": seg.mode.value,
        "sensor": seg.sensor.value,
        "sample_rate_hz": seg.sample_rate_hz,
    }


def write_segment(seg: SensorSegment, out_dir: PathLike) -> Path:
    """写一个片段（CSV + 元数据），返回 CSV 路径"""
    out = Path(out_dir)
    stem = file_stem(seg.segment_id)
    csv_path = out / f"{stem}.csv"
    frame = pd.DataFrame({"t_s": seg.timestamps(), "value": list(seg.values)}, columns=CSV_COLUMNS)
    try:
        frame.to_csv(csv_path, index=False, lineterminator="\n")
    except OSError as e:
        raise StorageException(f"Cannot write segment {csv_path}: {e}", path=str(csv_path)) from e
    write_json(out / f"{stem}.json", _sidecar(seg))
    return csv_path


def write_segments(
    segments: Sequence[SensorSegment],
    out_dir: PathLike,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    写入片段目录和 manifest.json

    Args:
        segments: 片段列表
        out_dir: 输出目录（不存在则创建）
        extra: manifest 附加字段（如 seed）

    Returns:
        manifest 路径
    """
    out = Path(out_dir)
    _ensure_dir(out)
    entries = []
    for seg in segments:
        csv_path = write_segment(seg, out)
        entries.append({"file": csv_path.name, **_sidecar(seg), "n_total": seg.n_total})

    manifest = {**(extra or {}), "n_segments": len(entries), "segments": entries}
    manifest_path = out / MANIFEST_NAME
    write_json(manifest_path, manifest)
    logger.info(f"Wrote {len(entries)} segments to {out}")
    return manifest_path


def read_segment(csv_path: PathLike) -> SensorSegment:
    """
    读取一个片段（CSV + 同名 .json 元数据）

    不做片段校验，由调用方决定跳过还是失败
    """
    path = Path(csv_path)
    meta = read_json(path.with_suffix(".json"))
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise StorageException(f"Cannot read segment {path}: {e}", path=str(path)) from e
    if "value" not in frame.columns:
        raise StorageException(f"Segment {path} has no 'value' column", path=str(path))

    try:
        return SensorSegment(
            segment_id=meta.get("segment_id") or path.stem,
            mode=TransportMode(meta["mode"]),
            sensor=SensorKind(meta["sensor"]),
            sample_rate_hz=float(meta.get("sample_rate_hz", 1.0)),
            values=tuple(float(v) for v in frame["value"].tolist()),
        )
    except (KeyError, ValueError, TypeError) as e:
        raise StorageException(f"Bad metadata for segment {path}: {e}", path=str(path)) from e


def read_segments(in_dir: PathLike) -> List[SensorSegment]:
    """
    读取目录中的全部片段

    有 manifest.json 时按其顺序读取，否则按文件名排序读取所有带元数据的 *.csv

    Raises:
        StorageException: 目录不存在或文件不可读
        EmptyInputException: 目录中没有片段
    """
    root = Path(in_dir)
    if not root.is_dir():
        raise StorageException(f"Input directory not found: {root}", path=str(root))

    manifest_path = root / MANIFEST_NAME
    if manifest_path.is_file():
        manifest = read_json(manifest_path)
        files = [root / entry["file"] for entry in manifest.get("segments", [])]
    else:
        files = [p for p in sorted(root.glob("*.csv")) if p.with_suffix(".json").is_file()]

    if not files:
        raise EmptyInputException(f"segment directory {root}")

    segments = [read_segment(p) for p in files]
    logger.info(f"Read {len(segments)} segments from {root}")
    return segments


def write_compressed(segments: Iterable[CompressedSegment], path: PathLike) -> int:
    """写 JSONL，返回行数"""
    count = 0
    try:
        with Path(path).open("w", encoding="utf-8", newline="\n") as f:
            for cs in segments:
                f.write(cs.model_dump_json())
                f.write("\n")
                count += 1
    except OSError as e:
        raise StorageException(f"Cannot write {path}: {e}", path=str(path)) from e
    return count


def read_compressed(path: PathLike) -> List[CompressedSegment]:
    """
    读 JSONL

    Raises:
        StorageException: 文件不可读
        ValidationException: 某行不是合法的压缩片段
        EmptyInputException: 文件中没有记录
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise StorageException(f"Cannot read {path}: {e}", path=str(path)) from e

    segments = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            segments.append(CompressedSegment.model_validate_json(line))
        except ValidationError as e:
            raise ValidationException(
                f"Invalid compressed segment on line {line_no} of {path}: {e.errors()[0]['msg']}",
                code="bad_compressed_record",
                details={"line": line_no},
            ) from e

    if not segments:
        raise EmptyInputException(f"compressed file {path}")
    return segments
