"""Kernel backend selection, resolved once at import.

The compiled extension is preferred; the pure-Python fallback is used when
it is missing or when TENSOR_RMT_PURE=1 is set. Both expose the same
solve_point / solve_grid API with identical update semantics.
"""
import os

if os.environ.get("TENSOR_RMT_PURE") == "1":
    from . import _fppure as _impl

    BACKEND = "pure-python"
else:
    try:
        from . import _fpcore as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _fppure as _impl

        BACKEND = "pure-python"

solve_point = _impl.solve_point
solve_grid = _impl.solve_grid

__all__ = ["solve_point", "solve_grid", "BACKEND"]
