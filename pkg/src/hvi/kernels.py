"""Hot-kernel backend selection.

The package ships two implementations of its inner loops:

* ``numba`` — scalar loops jitted with ``@njit`` (default when numba imports)
* ``numpy`` — vectorized pure-numpy fallback

Selection happens once at import time: set ``HVI_DISABLE_NUMBA=1`` (or
``true``/``yes``) to force the numpy path, e.g. on platforms without a
working numba toolchain.  ``get_backend()`` exposes both for tests and for
``benchmarks/backend_bench.py``.

Within one backend every kernel is a pure function of its arguments, so
results are bit-reproducible across runs, workers, and chunk assignments.
"""

from __future__ import annotations

import os

from . import _kernels_numpy

_FLAG = os.environ.get("HVI_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG in {"1", "true", "yes"}

if not _DISABLED:
    try:
        from . import _kernels_numba
        BACKEND = "numba"
        _active = _kernels_numba
    except ImportError:
        BACKEND = "numpy"
        _active = _kernels_numpy
else:
    BACKEND = "numpy"
    _active = _kernels_numpy

uniforms = _active.uniforms
normals = _active.normals
norm_ppf = _active.norm_ppf
path_stats = _active.path_stats
gap_samples = _active.gap_samples


def get_backend(name=None):
    """Return a kernel namespace: active one, or 'numba'/'numpy' by name."""
    if name is None:
        return _active
    if name == "numpy":
        return _kernels_numpy
    if name == "numba":
        from . import _kernels_numba
        return _kernels_numba
    raise ValueError(f"unknown kernel backend {name!r}")
