"""Solver kernel backend selection.

The compiled extension (proxymig.kernels._compiled) is preferred when it
was built; otherwise the numpy reference implementation is used. Both
produce bit-identical results, so the choice only affects speed. Set
PROXYMIG_PURE=1 in the environment to force the reference backend.
"""

import os

from . import reference

if os.environ.get("PROXYMIG_PURE", "0") not in ("", "0"):
    _impl = reference
    BACKEND = "reference"
else:
    try:
        from . import _compiled as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = reference
        BACKEND = "reference"

transportation = _impl.transportation
eam_local_search = _impl.eam_local_search


def available_backends():
    """Name -> module for every importable backend (for tests/benchmarks)."""
    backends = {"reference": reference}
    try:
        from . import _compiled

        backends["compiled"] = _compiled
    except ImportError:
        pass
    return backends
