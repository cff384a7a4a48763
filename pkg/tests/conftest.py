import numpy as np
import pytest

from mmsqueeze.spectral import DispersionModel, FieldDispersion, PumpEnvelope, auto_grid, build_pdc_jsa

W0 = 2.4e15  # degenerate signal/idler carrier, rad/s


def correlated_pdc(n=128, n_sigma=8.0, phasematching="gaussian_approx", coupling_scale=1.0):
    """Double-Gaussian PDC source with a few thermal modes (K ~ 2.2)."""
    pump = PumpEnvelope(1.0, 2 * W0, 2e12)
    disp = DispersionModel(FieldDispersion(2 * W0, 0.0, 5e-9), FieldDispersion(W0, 0.0, 3e-9),
                           FieldDispersion(W0, 0.0, 6e-9))
    length = 5e-3
    grid = auto_grid(pump, disp, length, n=n, n_sigma=n_sigma)
    return build_pdc_jsa(pump, disp, length, grid, phasematching, coupling_scale)


@pytest.fixture(scope="session")
def pdc_jsa():
    return correlated_pdc()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
