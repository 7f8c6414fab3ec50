"""Hot-loop kernels: the compiled extension when built, numpy otherwise.

Set ``ABIOT_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("ABIOT_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend or python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

accumulate_exposure = _impl.accumulate_exposure
removal_sweep = _impl.removal_sweep
polyline_distance = _impl.polyline_distance
