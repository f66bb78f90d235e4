"""Plain ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored.  Keys are case-insensitive and
dashes are folded to underscores, so a config file can mirror CLI flags.
"""
from __future__ import annotations

from pathlib import Path

from .errors import ConfigError


def parse_key_values(text):
    out = {}
    for lineno, raw in enumerate(str(text).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower().lstrip("-").replace("-", "_")
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def read_key_values(path):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_key_values(text)
