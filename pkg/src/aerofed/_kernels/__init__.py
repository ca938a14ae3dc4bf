"""Hot allocation kernels with a compiled core and a pure-Python fallback.

The compiled extension (``_speedups``, built from Cython) is preferred;
if it is missing, or ``AEROFED_PURE_PYTHON`` is set to a non-empty value,
the pure fallback is used.  Both produce bit-identical results; see
``benchmarks/bench_kernels.py`` for the speed comparison.
"""

import os

from . import _pure

if os.environ.get("AEROFED_PURE_PYTHON"):
    _impl = _pure
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = _pure

BACKEND: str = _impl.BACKEND
waterfill_grants = _impl.waterfill_grants

__all__ = ["BACKEND", "waterfill_grants"]
