"""Hot threshold-scan kernels behind the tree and boosting trainers.

Two interchangeable backends: a compiled Cython extension and a numpy
fallback. Selection happens once at import; set RDA_BENCH_PURE=1 to force
the fallback. Both backends implement identical arithmetic (sequential
prefix sums, ascending cut scan, strict-improvement tie-breaks) so trained
models do not depend on which one is active.
"""

import os

if os.environ.get("RDA_BENCH_PURE", "") not in ("", "0"):
    from . import _pykernels as _impl

    BACKEND = "pure"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _pykernels as _impl

        BACKEND = "pure"

stump_scan = _impl.stump_scan
gini_scan = _impl.gini_scan
mse_scan = _impl.mse_scan

__all__ = ["BACKEND", "stump_scan", "gini_scan", "mse_scan"]
