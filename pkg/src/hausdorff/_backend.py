"""Select the compiled kernels when available, the NumPy fallback otherwise.

Set ``HAUSDORFF_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
pairwise_sum = _fallback.pairwise_sum
ascent_qp = _fallback.ascent_qp

if os.environ.get("HAUSDORFF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _speedups
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        pairwise_sum = _speedups.pairwise_sum
        ascent_qp = _speedups.ascent_qp

vector_norm = _fallback.vector_norm
pairwise_sum_rows = _fallback.pairwise_sum_rows
