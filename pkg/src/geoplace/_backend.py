"""Selects the numerical core at import time.

The compiled ``_core`` extension is preferred; the NumPy module ``_pure`` is
used when the extension is missing or when ``GEOPLACE_BACKEND=numpy`` is set.
"""
import os

from . import _pure

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

AVAILABLE = {"numpy": _pure}
if _core is not None:
    AVAILABLE["cython"] = _core

_requested = os.environ.get("GEOPLACE_BACKEND", "").strip().lower()
if _requested in AVAILABLE:
    impl = AVAILABLE[_requested]
else:
    impl = _core if _core is not None else _pure


def name():
    return impl.NAME


def set_backend(backend):
    """Switch the active core; returns the previously active module name."""
    global impl
    if backend not in AVAILABLE:
        raise ValueError(f"backend {backend!r} unavailable; have {sorted(AVAILABLE)}")
    previous = impl.NAME
    impl = AVAILABLE[backend]
    return previous
