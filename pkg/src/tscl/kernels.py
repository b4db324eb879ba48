"""Backend selection for the inner-loop kernels.

The compiled extension is used when it was built; otherwise the pure-Python
module is loaded. Set ``TSCL_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("TSCL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

ols_slope = _impl.ols_slope
chain_train = _impl.chain_train
chain_train_batch = _impl.chain_train_batch
grid_train = _impl.grid_train
grid_train_batch = _impl.grid_train_batch
mdp_episode = _impl.mdp_episode
mdp_greedy_success = _impl.mdp_greedy_success

__all__ = [
    "BACKEND",
    "ols_slope",
    "chain_train",
    "chain_train_batch",
    "grid_train",
    "grid_train_batch",
    "mdp_episode",
    "mdp_greedy_success",
]
