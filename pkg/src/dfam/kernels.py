"""Kernel backend selection.

The compiled extension is preferred when it was built; otherwise the NumPy
fallback is used. ``DFAM_KERNELS=python`` forces the fallback, which is
handy for benchmarking one against the other.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None


def available_backends():
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name):
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    if name == "python":
        return _kernels_py
    raise ValueError(f"unknown kernel backend {name!r}")


if os.environ.get("DFAM_KERNELS") == "python" or _compiled is None:
    _active = _kernels_py
    BACKEND = "python"
else:
    _active = _compiled
    BACKEND = "compiled"

aggregate_scores = _active.aggregate_scores
aggregate_scores_batch = _active.aggregate_scores_batch
