"""Selects the compiled kernel extension or the pure-numpy fallback.

The compiled Cython module ``ciasr._kernels`` covers the two hot inner loops
(weighted Bessel reductions for the quadrature grids and the moment scan over
large samples).  Set ``CIASR_PURE=1`` to force the fallback; the selected
implementation is reported in ``BACKEND``.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("CIASR_PURE", "") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

weighted_j0_sum = _impl.weighted_j0_sum
weighted_j1_sum = _impl.weighted_j1_sum
empirical_j0_moment = _impl.empirical_j0_moment
scan_first_nonpositive = _impl.scan_first_nonpositive
