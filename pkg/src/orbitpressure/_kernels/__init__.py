"""Hot kernels with import-time backend selection.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``ORBIT_PRESSURE_PURE=1`` is set, the numpy reference
implementation is used. Both return identical values.
"""
import os

from . import _pykernels

FAMILY_CODES = {"bowen": 0, "mean": 1, "maxmean": 2, "fk": 3}


def _load():
    if os.environ.get("ORBIT_PRESSURE_PURE", "") not in ("", "0"):
        return _pykernels
    try:
        from . import _ckernels
    except ImportError:
        return _pykernels
    return _ckernels


backend = _load()
BACKEND = backend.BACKEND


def use(name):
    """Switch backend at runtime (``"cython"`` or ``"python"``); returns the old name."""
    global backend, BACKEND
    old = BACKEND
    if name == "python":
        backend = _pykernels
    elif name == "cython":
        from . import _ckernels
        backend = _ckernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = backend.BACKEND
    return old


def available():
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        return names
    return ["cython"] + names
