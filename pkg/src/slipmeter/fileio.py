"""Small output helpers: atomic writes and round-trip float formatting."""

import os
import tempfile
from pathlib import Path


def fmt_float(value) -> str:
    """Shortest decimal string that parses back to exactly the same float."""
    return repr(float(value))


def atomic_write_text(path, text) -> Path:
    """Write text via a temp file + rename so readers never see partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path
