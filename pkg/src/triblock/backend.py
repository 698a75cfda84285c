"""Kernel backend selection.

The compiled extension is preferred when importable; TRIBLOCK_KERNELS=py
forces the numpy implementations, TRIBLOCK_KERNELS=c demands the compiled
ones (raising if they are missing).
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("TRIBLOCK_KERNELS", "").strip().lower()

if _forced in ("py", "python", "fallback"):
    kernels = _kernels_py
elif _forced in ("c", "compiled", "ext"):
    from . import _kernels as kernels  # type: ignore[no-redef]
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py


def backend_name() -> str:
    return kernels.NAME


def available_backends():
    out = [_kernels_py]
    try:
        from . import _kernels
        out.insert(0, _kernels)
    except ImportError:
        pass
    return out
