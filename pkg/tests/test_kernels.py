import numpy as np
import pytest

from mmsqueeze import _kernels
from mmsqueeze._kernels import _pymoments


def compiled():
    try:
        from mmsqueeze._kernels import _cmoments
    except ImportError:
        pytest.skip("compiled extension not built")
    return _cmoments


def brute(ns, ni, n_blocks, order):
    n = ns.size
    out = np.zeros((n_blocks, order + 1, order + 1))
    for b in range(n_blocks):
        for p in range(b * n // n_blocks, (b + 1) * n // n_blocks):
            for a in range(order + 1):
                for c in range(order + 1):
                    fa = np.prod([ns[p] - j for j in range(a)], dtype=float)
                    fc = np.prod([ni[p] - j for j in range(c)], dtype=float)
                    out[b, a, c] += fa * fc
    return out


@pytest.fixture
def records():
    rng = np.random.default_rng(17)
    return rng.geometric(0.4, 5003).astype(np.int64) - 1, rng.poisson(2.0, 5003).astype(np.int64)


def test_python_matches_brute_force():
    rng = np.random.default_rng(2)
    ns, ni = rng.integers(0, 7, 97), rng.integers(0, 7, 97)
    assert np.allclose(_pymoments.block_factorial_sums(ns, ni, 7, 4), brute(ns, ni, 7, 4), rtol=1e-13, atol=0)


@pytest.mark.parametrize("n_blocks,order", [(1, 0), (20, 3), (20, 8), (333, 6)])
def test_backends_agree(records, n_blocks, order):
    cm = compiled()
    ns, ni = records
    a = cm.block_factorial_sums(ns, ni, n_blocks, order)
    b = _pymoments.block_factorial_sums(ns, ni, n_blocks, order)
    assert a.shape == b.shape == (n_blocks, order + 1, order + 1)
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_active_backend_reported():
    assert _kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("impl", ["python", "cython"])
def test_guards(impl):
    fn = _pymoments.block_factorial_sums if impl == "python" else compiled().block_factorial_sums
    ns = np.zeros(10, dtype=np.int64)
    with pytest.raises(ValueError):
        fn(ns, np.zeros(9, dtype=np.int64), 2, 2)
    with pytest.raises(ValueError):
        fn(ns, ns, 11, 2)
    with pytest.raises(ValueError):
        fn(ns, ns, 2, 17)


def test_pure_python_selection(monkeypatch):
    import importlib
    monkeypatch.setenv("MMSQUEEZE_PURE_PYTHON", "1")
    mod = importlib.reload(_kernels)
    try:
        assert mod.BACKEND == "python"
        assert mod.block_factorial_sums is _pymoments.block_factorial_sums
    finally:
        monkeypatch.delenv("MMSQUEEZE_PURE_PYTHON")
        importlib.reload(_kernels)
