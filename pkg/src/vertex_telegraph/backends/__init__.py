"""Backend selection for the hot kernels.

The numba backend is the default; set VERTEX_TELEGRAPH_NO_NUMBA=1 to force the
pure-numpy fallback (used automatically when numba is not importable).  Both
backends expose the same functions with identical sampling output; see
``vertex_telegraph.benchmark`` for a timing comparison.
"""
from __future__ import annotations

import os

from . import numpy_impl


def _flag_set(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


USING_NUMBA = False
if not _flag_set("VERTEX_TELEGRAPH_NO_NUMBA"):
    try:
        from . import numba_impl as _impl
        USING_NUMBA = True
    except ImportError:  # pragma: no cover - exercised only without numba
        _impl = numpy_impl
else:
    _impl = numpy_impl

impl = _impl
numpy_backend = numpy_impl


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"
