"""Central logging utilities for the fatigue toolkit.

Environment variables:
    LOG_LEVEL=INFO|DEBUG|... (default: settings.log_level)
    LOG_FORMAT=console|json (default: console)
    LOG_NO_COLOR=1 disables colored console output.
    LOG_TIMEZONE=utc|local (default: local)

Usage:
    from src.common.logging_utils import configure_logging, get_logger, log_context
    configure_logging(service="fatigue-cli")  # idempotent
    logger = get_logger(__name__)
    with log_context(scenario="dogbone", cycle=12):
        logger.info("peak stress %.1f MPa", 301.4)

Fields bound with `log_context` (and any `extra=` fields) become top-level keys in JSON
output and a `[key=value ...]` suffix in console output.
"""
from __future__ import annotations

import contextvars
import json
import logging
import os
import sys
import threading
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Any, Dict, Iterator, Optional

_CONFIG_LOCK = threading.Lock()
_ALREADY_CONFIGURED = False

_RUN_CONTEXT: contextvars.ContextVar[Dict[str, Any]] = contextvars.ContextVar(
    "run_context", default={}
)

# Attributes every LogRecord has; anything else came in through `extra=` or the context
_RESERVED_ATTRS = frozenset(
    logging.LogRecord("", 0, "", 0, "", (), None).__dict__.keys() | {"message", "asctime"}
)


@contextmanager
def log_context(**fields: Any) -> Iterator[None]:
    """Bind run fields (scenario, cycle, ...) to every record emitted inside the block."""
    token = _RUN_CONTEXT.set({**_RUN_CONTEXT.get(), **fields})
    try:
        yield
    finally:
        _RUN_CONTEXT.reset(token)


def current_context() -> Dict[str, Any]:
    return dict(_RUN_CONTEXT.get())


class RunContextFilter(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        for key, value in _RUN_CONTEXT.get().items():
            if not hasattr(record, key):
                setattr(record, key, value)
        return True


def _extra_fields(record: logging.LogRecord) -> Dict[str, Any]:
    return {
        k: v
        for k, v in record.__dict__.items()
        if k not in _RESERVED_ATTRS and not k.startswith("_")
    }


def _timestamp(record: logging.LogRecord, tz_local: bool) -> datetime:
    ts = datetime.fromtimestamp(record.created, tz=timezone.utc)
    return ts.astimezone() if tz_local else ts


# --------------------------------------------------------------------------------------
# Formatters
# --------------------------------------------------------------------------------------


class ConsoleFormatter(logging.Formatter):
    COLORS = {
        "DEBUG": "\x1b[38;5;245m",
        "INFO": "\x1b[38;5;39m",
        "WARNING": "\x1b[38;5;214m",
        "ERROR": "\x1b[38;5;196m",
        "CRITICAL": "\x1b[48;5;196m\x1b[38;5;231m",
    }
    RESET = "\x1b[0m"

    def __init__(self, tz_local: bool, color: bool):
        super().__init__()
        self.tz_local = tz_local
        self.color = color

    def format(self, record: logging.LogRecord) -> str:  # noqa: D401
        ts = _timestamp(record, self.tz_local).strftime("%Y-%m-%d %H:%M:%S")
        line = f"{ts} | {record.levelname:<8} | {record.name} | {record.getMessage()}"
        fields = {k: v for k, v in _extra_fields(record).items() if k != "service"}
        if fields:
            line += " [" + " ".join(f"{k}={v}" for k, v in fields.items()) + "]"
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        color = self.COLORS.get(record.levelname, "") if self.color else ""
        return f"{color}{line}{self.RESET}" if color else line


class JsonFormatter(logging.Formatter):
    def __init__(self, tz_local: bool):
        super().__init__()
        self.tz_local = tz_local

    def format(self, record: logging.LogRecord) -> str:  # noqa: D401
        payload: Dict[str, Any] = {
            "ts": _timestamp(record, self.tz_local).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        if record.exc_info:
            payload["exc_info"] = self.formatException(record.exc_info)
        for key, value in _extra_fields(record).items():
            if key in payload:
                continue
            try:
                json.dumps({key: value})
                payload[key] = value
            except (TypeError, ValueError):
                payload[key] = repr(value)
        return json.dumps(payload, ensure_ascii=False)


# --------------------------------------------------------------------------------------
# Public API
# --------------------------------------------------------------------------------------


def configure_logging(
    service: str | None = None, *, level: str | None = None, force: bool = False
) -> None:
    """Install one stderr handler on the root logger.

    `level` wins over LOG_LEVEL and the settings; a second call is a no-op unless `force`.
    """
    global _ALREADY_CONFIGURED
    with _CONFIG_LOCK:
        if _ALREADY_CONFIGURED and not force:
            return

        log_level = (level or os.getenv("LOG_LEVEL") or _settings_level()).upper()
        tz_local = os.getenv("LOG_TIMEZONE", "local").lower() != "utc"
        if os.getenv("LOG_FORMAT", "console").lower() == "json":
            formatter: logging.Formatter = JsonFormatter(tz_local=tz_local)
        else:
            color = sys.stderr.isatty() and os.getenv("LOG_NO_COLOR") != "1"
            formatter = ConsoleFormatter(tz_local=tz_local, color=color)

        root = logging.getLogger()
        for h in list(root.handlers):
            root.removeHandler(h)
        handler = logging.StreamHandler()
        handler.setFormatter(formatter)
        handler.addFilter(RunContextFilter())
        root.addHandler(handler)
        root.setLevel(getattr(logging, log_level, logging.INFO))

        if service:
            _ServiceLoggerAdapter.BASE_SERVICE = service
        _ALREADY_CONFIGURED = True


def _settings_level() -> str:
    try:
        from src.core.config import get_settings

        return get_settings().log_level
    except Exception:  # pragma: no cover - broken .env should not kill logging
        return "INFO"


def get_logger(name: str) -> logging.Logger:
    base = logging.getLogger(name)
    if _ServiceLoggerAdapter.BASE_SERVICE:
        return _ServiceLoggerAdapter(  # type: ignore[return-value]
            base, {"service": _ServiceLoggerAdapter.BASE_SERVICE}
        )
    return base


class _ServiceLoggerAdapter(logging.LoggerAdapter):
    BASE_SERVICE: Optional[str] = None

    def process(self, msg: Any, kwargs: Dict[str, Any]):  # noqa: D401
        extra = kwargs.get("extra") or {}
        extra.setdefault("service", self.extra["service"])
        kwargs["extra"] = extra
        return msg, kwargs


__all__ = ["configure_logging", "current_context", "get_logger", "log_context"]
