"""Backend selection for the hot kernels.

The compiled ``_core`` extension is used when it has been built; otherwise
the NumPy fallback in ``_core_py`` is used.  Setting ``BESOVLAB_PURE=1``
forces the fallback.
"""
import os

if os.environ.get("BESOVLAB_PURE", "") not in ("", "0"):
    from . import _core_py as _impl
else:
    try:
        from . import _core as _impl
    except ImportError:  # extension not built
        from . import _core_py as _impl

BACKEND = _impl.BACKEND
seg_index = _impl.seg_index
seg_eval = _impl.seg_eval
pl_eval = _impl.pl_eval
pl_eval_scalar = _impl.pl_eval_scalar
seg_root = _impl.seg_root
kdiff = _impl.kdiff
kdiff_power_sums = _impl.kdiff_power_sums
