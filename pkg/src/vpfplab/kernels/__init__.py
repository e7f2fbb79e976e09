"""Kernel backend selection.

The compiled Cython kernels are preferred when the extension was built;
the NumPy implementations are the fallback and the reference.  Set
VPFPLAB_KERNELS=py or VPFPLAB_KERNELS=c to force a backend (``c`` raises
if the extension is unavailable).
"""

from __future__ import annotations

import os

_choice = os.environ.get("VPFPLAB_KERNELS", "auto").lower()

if _choice not in ("auto", "c", "py"):
    raise RuntimeError(f"VPFPLAB_KERNELS must be auto, c, or py, got {_choice!r}")

if _choice == "py":
    from . import _impl_py as _impl
elif _choice == "c":
    from . import _impl_c as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _impl_c as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _impl_py as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND
advect_x = _impl.advect_x
advect_v = _impl.advect_v
fp_apply = _impl.fp_apply
thomas_shared = _impl.thomas_shared

__all__ = ["BACKEND", "advect_x", "advect_v", "fp_apply", "thomas_shared"]
