"""NumPy implementation of the per-block factorial-moment reduction."""
import numpy as np

MAX_ORDER = 16


def _falling(counts: np.ndarray, order: int) -> np.ndarray:
    """Rows ``[(N)_0, (N)_1, ..., (N)_order]`` for each count."""
    out = np.empty((counts.size, order + 1))
    out[:, 0] = 1.0
    c = counts.astype(float)
    for a in range(1, order + 1):
        out[:, a] = out[:, a - 1] * (c - (a - 1))
    return out


def block_factorial_sums(ns, ni, n_blocks, order):
    ns = np.ascontiguousarray(ns, dtype=np.int64)
    ni = np.ascontiguousarray(ni, dtype=np.int64)
    n = ns.shape[0]
    if ni.shape[0] != n:
        raise ValueError("signal and idler records differ in length")
    if order < 0 or order > MAX_ORDER:
        raise ValueError("order out of range")
    if n_blocks < 1 or n_blocks > n:
        raise ValueError("need 1 <= n_blocks <= number of records")
    out = np.zeros((n_blocks, order + 1, order + 1))
    for b in range(n_blocks):
        sl = slice(b * n // n_blocks, (b + 1) * n // n_blocks)
        out[b] = _falling(ns[sl], order).T @ _falling(ni[sl], order)
    return out
