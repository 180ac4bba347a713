"""Hot numerical kernels with a compiled core and a pure-Python fallback.

The compiled Cython module is preferred when it was built; setting the
environment variable ``TRANSPORTQ_PURE=1`` before import forces the
numpy/scipy fallback (useful for benchmarking and debugging).  Both
implementations satisfy the same contract and are cross-checked in the
test suite.
"""

import os

from . import _pure

if os.environ.get("TRANSPORTQ_PURE", "").strip() not in ("", "0"):
    _impl = _pure
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _pure

expm = _impl.expm
transport_accumulate = _impl.transport_accumulate
BACKEND = _impl.BACKEND

__all__ = ["expm", "transport_accumulate", "BACKEND"]
