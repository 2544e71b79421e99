"""Kernel backend selection.

The compiled extension (``gaptol._core``) is preferred when importable; the
pure-Python kernels are the fallback. ``GAPTOL_BACKEND=python|compiled``
forces the choice (forcing ``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("GAPTOL_BACKEND", "").strip().lower()

if _forced == "python":
    kernels = _kernels_py
elif _forced == "compiled":
    from . import _core as kernels  # type: ignore[no-redef]
else:
    try:
        from . import _core as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py


def backend_name() -> str:
    return kernels.BACKEND_NAME
