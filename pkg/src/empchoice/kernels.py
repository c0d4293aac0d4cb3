"""Backend selection for the resampling kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``EMPCHOICE_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy fallback is used.  ``BACKEND`` names the choice.
"""

from __future__ import annotations

import os

from . import _pykernels

_force_pure = os.environ.get("EMPCHOICE_PURE_PYTHON", "") not in ("", "0")

if _force_pure:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels
        BACKEND = "python"

threshold_batch = _impl.threshold_batch
closure_batch = _impl.closure_batch


def available_backends() -> dict:
    """Map of backend name to kernel module, for benchmarks and tests."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:  # pragma: no cover
        pass
    return out
