"""Backend selection for the byte kernels.

The Cython extension ``_gfcore`` is used when it was built; otherwise the
pure-Python module takes over. Set ``EDGESHARD_PURE_PYTHON=1`` to force the
fallback (useful for benchmarking both).
"""

import os

from . import _kernels_py

if os.environ.get("EDGESHARD_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _gfcore as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

split_payloads = _impl.split_payloads
interpolate_at_zero = _impl.interpolate_at_zero
share_crcs = _impl.share_crcs


def available_backends():
    """Map backend name -> kernel module for every importable implementation."""
    backends = {"python": _kernels_py}
    try:
        from . import _gfcore
    except ImportError:
        pass
    else:
        backends["cython"] = _gfcore
    return backends
