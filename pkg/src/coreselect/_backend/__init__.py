"""Training-kernel backend selection.

The compiled Cython kernels are used when the extension built; otherwise the
NumPy implementations take over with identical semantics. Override with the
CORESELECT_BACKEND environment variable: "c" forces the compiled kernels
(ImportError if missing), "python" forces the NumPy ones.
"""

import os

from ..exceptions import ConfigError
from . import pykernels

_env = os.environ.get("CORESELECT_BACKEND", "").strip().lower()

if _env in ("python", "py", "numpy"):
    _impl = pykernels
    BACKEND_NAME = "python"
elif _env in ("", "c", "compiled", "cython"):
    try:
        from . import _ckernels as _impl

        BACKEND_NAME = "c"
    except ImportError:
        if _env:
            raise
        _impl = pykernels
        BACKEND_NAME = "python"
else:
    raise ConfigError(
        f"CORESELECT_BACKEND={_env!r} not recognized; use 'c' or 'python'"
    )

train_logistic = _impl.train_logistic
train_mlp = _impl.train_mlp

__all__ = ["BACKEND_NAME", "train_logistic", "train_mlp", "pykernels"]
