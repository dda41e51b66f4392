"""Hot numerical kernels with a compiled core and a pure-Python fallback.

The compiled extension is used when it has been built; set
``RTRLBENCH_PURE_PYTHON=1`` to force the fallback. Both backends stay
importable as :mod:`._pykernels` and (when built) :mod:`._ckernels` so tests
and the benchmark can compare them directly.
"""
import os

from . import _pykernels as python_backend

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("RTRLBENCH_PURE_PYTHON"):
    _active = compiled_backend
else:
    _active = python_backend

BACKEND = _active.BACKEND
gae = _active.gae
discount_cumsum = _active.discount_cumsum
dxl_integrate = _active.dxl_integrate
create_integrate = _active.create_integrate
ray_distances = _active.ray_distances
docker_terms = _active.docker_terms

__all__ = [
    "BACKEND",
    "compiled_backend",
    "python_backend",
    "gae",
    "discount_cumsum",
    "dxl_integrate",
    "create_integrate",
    "ray_distances",
    "docker_terms",
]
