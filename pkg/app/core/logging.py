"""
日志

CLI 的日志全部写到 stderr，stdout 留给数据：
- 默认每条日志一行JSON
- DEBUG 级别输出易读文本，终端下按级别着色

每条记录附带当前的 run_id / segment_id（contextvars，跨 asyncio 任务隔离）
"""
import json
import logging
import sys
from contextvars import ContextVar
from datetime import datetime, timezone
from typing import Any, Dict, Optional

ROOT_LOGGER = "app"

_context: Dict[str, ContextVar[Optional[str]]] = {
    "run_id": ContextVar("run_id", default=None),
    "segment_id": ContextVar("segment_id", default=None),
}

# LogRecord 自带的属性，其余都是 extra
_RECORD_ATTRS = frozenset(vars(logging.LogRecord("", 0, "", 0, "", None, None))) | {"message", "asctime"} | set(_context)


class ContextFilter(logging.Filter):
    """把运行上下文写入日志记录，未设置时为 "-" """

    def filter(self, record: logging.LogRecord) -> bool:
        for name, var in _context.items():
            setattr(record, name, var.get() or "-")
        return True


class JSONFormatter(logging.Formatter):
    """一行一个JSON对象；上下文和 extra 字段放在顶层"""

    def format(self, record: logging.LogRecord) -> str:
        ts = datetime.fromtimestamp(record.created, timezone.utc)
        entry: Dict[str, Any] = {
            "ts": ts.isoformat(timespec="milliseconds").replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "msg": record.getMessage(),
        }
        for name in _context:
            value = getattr(record, name, "-")
            if value != "-":
                entry[name] = value
        for key, value in record.__dict__.items():
            if key not in _RECORD_ATTRS and not key.startswith("_"):
                entry[key] = value
        if record.exc_info:
            entry["exc"] = self.formatException(record.exc_info)
        return json.dumps(entry, ensure_ascii=False, default=str)


class TextFormatter(logging.Formatter):
    """调试用的单行文本"""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[35m",
    }
    RESET = "\033[0m"

    def __init__(self, color: bool = False):
        super().__init__("%(asctime)s %(levelname)-7s %(name)s [%(run_id)s/%(segment_id)s] %(message)s")
        self.color = color

    def format(self, record: logging.LogRecord) -> str:
        text = super().format(record)
        if self.color and record.levelname in self.COLORS:
            return f"{self.COLORS[record.levelname]}{text}{self.RESET}"
        return text


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """
    配置 app 日志树（可重复调用，每次替换处理器）

    Args:
        level: 覆盖 settings.LOG_LEVEL（CLI --log-level）

    Returns:
        app 根记录器
    """
    from app.core.config import settings

    log_level = logging.getLevelName((level or settings.LOG_LEVEL).upper())
    if not isinstance(log_level, int):
        log_level = logging.INFO

    handler = logging.StreamHandler(sys.stderr)
    if log_level > logging.DEBUG:
        handler.setFormatter(JSONFormatter())
    else:
        handler.setFormatter(TextFormatter(color=sys.stderr.isatty()))
    handler.addFilter(ContextFilter())

    root = logging.getLogger(ROOT_LOGGER)
    root.handlers[:] = [handler]
    root.setLevel(log_level)
    root.propagate = False

    for name in ("httpx", "httpcore"):
        logging.getLogger(name).setLevel(logging.WARNING)
    return root


def get_logger(name: str) -> logging.Logger:
    """app 日志树下的记录器；模块名（app.xxx）原样使用"""
    if name == ROOT_LOGGER or name.startswith(ROOT_LOGGER + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


def set_log_context(run_id: Optional[str] = None, segment_id: Optional[str] = None) -> None:
    if run_id:
        _context["run_id"].set(run_id)
    if segment_id:
        _context["segment_id"].set(segment_id)


def clear_log_context() -> None:
    for var in _context.values():
        var.set(None)


logger = setup_logging()
