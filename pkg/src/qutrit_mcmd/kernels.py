"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
implementations are used. Set ``QUTRIT_MCMD_PURE=1`` to force the numpy
path.
"""
import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("QUTRIT_MCMD_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py
    else:
        BACKEND = "cython"
else:
    _impl = _kernels_py

inverse_cdf_counts = _impl.inverse_cdf_counts
inverse_cdf_counts_batch = _impl.inverse_cdf_counts_batch
evolve_sequence = _impl.evolve_sequence
qda_classify = _impl.qda_classify

__all__ = [
    "BACKEND",
    "inverse_cdf_counts",
    "inverse_cdf_counts_batch",
    "evolve_sequence",
    "qda_classify",
]
