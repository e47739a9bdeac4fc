"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python
backend is the fallback. ``MACCAL_KERNEL=py`` forces the fallback (useful
for the parity tests and the benchmark), ``MACCAL_KERNEL=c`` insists on
the compiled backend and fails loudly if it is missing.
"""

import os

from . import _kernels_py

_CHOICE = os.environ.get("MACCAL_KERNEL", "auto").strip().lower()

if _CHOICE in ("py", "python", "pure"):
    kernels = _kernels_py
    BACKEND = "python"
elif _CHOICE in ("c", "compiled", "ext"):
    from . import _kernels as kernels  # type: ignore[no-redef]

    BACKEND = "compiled"
elif _CHOICE == "auto":
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"
else:
    raise RuntimeError(f"MACCAL_KERNEL must be auto, c, or py, not {_CHOICE!r}")


def active_backend() -> str:
    """Name of the kernel backend selected at import ('compiled' or 'python')."""
    return BACKEND
