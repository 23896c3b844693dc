"""Backend selection for the propagation kernel.

The compiled extension is preferred; the pure-Python implementation is the
fallback.  Set RYDGATE_BACKEND=python to force the fallback (used by the
backend-consistency tests and the benchmark).
"""

import os

from . import _kernel_py

if os.environ.get("RYDGATE_BACKEND") == "python":
    _impl = _kernel_py
else:
    try:
        from . import _kernel as _impl
    except ImportError:
        _impl = _kernel_py

BACKEND = _impl.BACKEND
propagate_schedule = _impl.propagate_schedule


def available_backends():
    backends = {"python": _kernel_py}
    try:
        from . import _kernel

        backends["cython"] = _kernel
    except ImportError:
        pass
    return backends
