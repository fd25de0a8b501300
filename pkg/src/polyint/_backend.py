"""Select the compiled kernel module when present, NumPy fallback otherwise.

Set ``POLYINT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

fallback = _fallback

if os.environ.get("POLYINT_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

active = compiled if compiled is not None else fallback
NAME = "cython" if compiled is not None else "numpy"

lp_ray_lengths = active.lp_ray_lengths
lp_section_sums = active.lp_section_sums
