"""Selects the compiled DAG kernel when available, else the pure-Python one.

Set ``BANDIT_ROUTING_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _dagkernel_py

if os.environ.get("BANDIT_ROUTING_PURE_PYTHON", "") not in ("", "0"):
    backward_dp = _dagkernel_py.backward_dp
    BACKEND = "python"
else:
    try:
        from ._dagkernel import backward_dp
        BACKEND = "cython"
    except ImportError:
        backward_dp = _dagkernel_py.backward_dp
        BACKEND = "python"

__all__ = ["backward_dp", "BACKEND"]
