"""Deterministic, atomic file output."""

import os
import tempfile


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x, precision=10):
    """Stable text form of a number for CSV output."""
    return format(float(x), f".{precision}g")


def write_csv(path, header, rows, precision=10):
    """Write a CSV table atomically; numbers use :func:`fmt`.

    ``precision=17`` round-trips doubles exactly.
    """
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v, precision) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")
