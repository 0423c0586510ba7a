"""Hot numerical kernels: compiled extension with a pure-numpy fallback.

The compiled backend is selected at import time when the Cython extension
was built.  Set ``LCDPF_PURE_PYTHON=1`` to force the numpy fallback (used
by the kernel benchmark and the backend-equivalence tests).
"""

import os

if os.environ.get("LCDPF_PURE_PYTHON"):
    from lcdpf._kernels._py import design_matrix, systematic_resample_indices

    BACKEND = "python"
else:
    try:
        from lcdpf._kernels._core import design_matrix, systematic_resample_indices

        BACKEND = "cython"
    except ImportError:
        from lcdpf._kernels._py import design_matrix, systematic_resample_indices

        BACKEND = "python"

__all__ = ["design_matrix", "systematic_resample_indices", "BACKEND"]
