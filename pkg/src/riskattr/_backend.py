"""Kernel backend selection.

The compiled extension is used when it imports; set ``RISKATTR_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if os.environ.get("RISKATTR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"

shapley_from_values = kernels.shapley_from_values
points_in_convex_polygon = kernels.points_in_convex_polygon
min_sq_distances = kernels.min_sq_distances
