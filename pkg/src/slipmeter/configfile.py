"""Tiny ``key = value`` config files (a TOML-compatible subset).

Used for the dataset sidecar and simulation scenario files. Values are
quoted strings, bare words, booleans, integers, or floats; ``#`` starts a
comment.
"""

from pathlib import Path

from .errors import ParseError


def read_kv_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ParseError("file not found", path=path)
    return parse_kv_text(path.read_text(encoding="utf-8"), path=path)


def parse_kv_text(text, path=None) -> dict:
    data = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", path=path, line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ParseError("empty key", path=path, line=lineno)
        if key in data:
            raise ParseError(f"duplicate key {key!r}", path=path, line=lineno)
        data[key] = _coerce(value.strip(), path, lineno)
    return data


def _coerce(raw, path, lineno):
    if raw.startswith('"'):
        end = raw.find('"', 1)
        if end < 0:
            raise ParseError("unterminated string", path=path, line=lineno)
        rest = raw[end + 1 :].strip()
        if rest and not rest.startswith("#"):
            raise ParseError(f"trailing text after string: {rest!r}", path=path, line=lineno)
        return raw[1:end]
    raw = raw.split("#", 1)[0].strip()
    if not raw:
        raise ParseError("missing value", path=path, line=lineno)
    low = raw.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def format_kv(mapping) -> str:
    from .fileio import fmt_float

    lines = []
    for key, value in mapping.items():
        if value is None:
            continue
        if isinstance(value, bool):
            lines.append(f"{key} = {'true' if value else 'false'}")
        elif isinstance(value, int):
            lines.append(f"{key} = {value}")
        elif isinstance(value, float):
            lines.append(f"{key} = {fmt_float(value)}")
        else:
            lines.append(f'{key} = "{value}"')
    return "\n".join(lines) + "\n"


def write_kv_file(path, mapping) -> Path:
    from .fileio import atomic_write_text

    return atomic_write_text(path, format_kv(mapping))
