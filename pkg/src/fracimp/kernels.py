"""Backend selection for the hot kernels.

Prefers the compiled ``_kernels`` extension; falls back to the pure-NumPy
implementation.  Set ``FRACIMP_FORCE_PYTHON=1`` to force the fallback (used
by the benchmark and the backend-agreement tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("FRACIMP_FORCE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

rl_all_nodes = _impl.rl_all_nodes
l1_all_nodes = _impl.l1_all_nodes

__all__ = ["BACKEND", "rl_all_nodes", "l1_all_nodes"]
