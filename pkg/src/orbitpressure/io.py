"""Output helpers shared by the library and the CLI."""
from __future__ import annotations

import os
import tempfile


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt12(x: float) -> str:
    """Number text with 12 significant digits."""
    if x != x or x in (float("inf"), float("-inf")):
        return repr(x)
    text = format(x, ".12g")
    return "0" if text == "-0" else text
