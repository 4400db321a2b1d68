"""Numerical kernel backend selection.

The compiled Cython extension is preferred when it has been built;
otherwise the pure-numpy fallback is used. Set ``PROXNS_PURE_PYTHON=1``
to force the fallback (used by the benchmarks and backend tests).
"""

import os

if os.environ.get("PROXNS_PURE_PYTHON", "") == "1":
    from . import _numpy_impl as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _fastmath as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _numpy_impl as _impl

        BACKEND = "numpy"

soft_threshold_real = _impl.soft_threshold_real
soft_threshold_complex = _impl.soft_threshold_complex
lincomb3 = _impl.lincomb3
add_scaled = _impl.add_scaled
ball_project_real = _impl.ball_project_real
ball_project_complex = _impl.ball_project_complex
dwt1_level = _impl.dwt1_level
idwt1_level = _impl.idwt1_level
dwt2_level = _impl.dwt2_level
idwt2_level = _impl.idwt2_level


def backend_name():
    """Name of the active kernel backend ("cython" or "numpy")."""
    return BACKEND
