"""Hot numerical kernels.

The compiled Cython module is used when it was built; otherwise the NumPy
version is imported.  Set ``MMSQUEEZE_PURE_PYTHON=1`` to force the
fallback.

``block_factorial_sums(ns, ni, n_blocks, order)`` returns an array of shape
``(n_blocks, order + 1, order + 1)`` whose ``[b, a, c]`` entry is
``sum((N_s)_a * (N_i)_c)`` over the records of block ``b``; ``(N)_a`` is the
falling factorial.  Block ``b`` covers records ``[b*n//n_blocks,
(b+1)*n//n_blocks)``.
"""
import os

from . import _pymoments

BACKEND = "python"
block_factorial_sums = _pymoments.block_factorial_sums

if os.environ.get("MMSQUEEZE_PURE_PYTHON", "") != "1":
    try:
        from ._cmoments import block_factorial_sums  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

__all__ = ["BACKEND", "block_factorial_sums"]
