"""Backend selection for the hot loops.

The compiled ``_native`` extension is used when it imports; otherwise the
pure-Python ``_fallback`` module is used.  Setting ``LOGREC_PURE_PYTHON=1``
forces the fallback.
"""

import os

from . import _fallback

try:
    if os.environ.get("LOGREC_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _native as _impl
    BACKEND = "native"
except ImportError:
    _impl = _fallback
    BACKEND = "python"

bb_search = _impl.bb_search
ls_run = _impl.ls_run

BACKENDS = {"python": _fallback}
if BACKEND == "native":
    BACKENDS["native"] = _impl
