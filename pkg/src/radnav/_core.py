"""Kernel backend selection.

The hot numerical kernels exist twice: a compiled Cython extension
(``radnav._kernels``) and a pure-Python fallback (``radnav._kernels_py``)
with identical semantics. The compiled one is preferred when importable;
set ``RADNAV_PURE_PYTHON=1`` to force the fallback (useful for
benchmarking and for debugging without a compiler).

``benchmarks/bench_kernels.py`` compares the two.
"""
import os

if os.environ.get("RADNAV_PURE_PYTHON", "") not in ("", "0"):
    from radnav import _kernels_py as kernels
else:
    try:
        from radnav import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from radnav import _kernels_py as kernels  # type: ignore[no-redef]

KERNEL_BACKEND = kernels.BACKEND
