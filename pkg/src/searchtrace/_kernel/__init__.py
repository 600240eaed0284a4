"""Kernel backend selection.

The compiled extension is used when present; the pure-Python twin is the
fallback and the reference.  ``SEARCHTRACE_PURE=1`` forces the fallback,
which the test suite uses to exercise both paths.
"""

from __future__ import annotations

import os

from . import pykernel

if os.environ.get("SEARCHTRACE_PURE"):
    backend = pykernel
    BACKEND_NAME = "pure"
else:
    try:
        from . import ckernel as backend  # type: ignore[no-redef]

        BACKEND_NAME = "compiled"
    except ImportError:
        backend = pykernel
        BACKEND_NAME = "pure"

__all__ = ["backend", "pykernel", "BACKEND_NAME"]
