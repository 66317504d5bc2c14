"""Kernel backend selection.

The hot numerical kernels (normal-equation solves and bootstrap refits)
exist twice: a Cython extension (``_core``) and a pure-numpy reference
(``_ref``). The compiled backend is preferred when importable; set
``ESTIMAND_LAB_BACKEND=python`` or ``=compiled`` to force one. The active
choice is exposed as ``BACKEND``.
"""
import os

_forced = os.environ.get("ESTIMAND_LAB_BACKEND", "")
if _forced not in ("", "python", "compiled"):
    raise ImportError(
        f"ESTIMAND_LAB_BACKEND must be 'python' or 'compiled', got {_forced!r}"
    )

if _forced == "python":
    from . import _ref as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _forced == "compiled":
            raise
        from . import _ref as _impl

        BACKEND = "python"

ols_solve = _impl.ols_solve
bootstrap_ols = _impl.bootstrap_ols

__all__ = ["BACKEND", "ols_solve", "bootstrap_ols"]
