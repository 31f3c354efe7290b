"""Kernel dispatch: use the compiled extension when available.

Set QCA_TASEP_PURE_PYTHON=1 to force the numpy fallback (used to benchmark
the two implementations against each other).
"""

import os

if os.environ.get("QCA_TASEP_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl  # type: ignore[no-redef]

COMPILED: bool = bool(getattr(_impl, "COMPILED", False))
apply_superop = _impl.apply_superop

__all__ = ["COMPILED", "apply_superop"]
