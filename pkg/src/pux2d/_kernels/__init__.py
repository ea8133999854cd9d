"""Hot-kernel backend selection.

Imports the compiled Cython core when it is available and not disabled via the
PUX2D_PURE environment variable; otherwise falls back to the NumPy reference
implementations. `BACKEND` names the active implementation.
"""

import os

from . import reference

if os.environ.get("PUX2D_PURE", "").strip() not in ("", "0"):
    _impl = reference
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = reference

BACKEND = _impl.BACKEND

dlp_sum = _impl.dlp_sum
winding_angle = _impl.winding_angle
moments_near = _impl.moments_near
moments_far = _impl.moments_far
dd_tri_solve_lower = _impl.dd_tri_solve_lower
dd_tri_solve_upper = _impl.dd_tri_solve_upper
dd_gaussian_matrix = _impl.dd_gaussian_matrix
