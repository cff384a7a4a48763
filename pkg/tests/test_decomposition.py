import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mmsqueeze.decomposition import (SqueezerSpectrum, fit_thermal, reconstruct, schmidt_decompose,
                                     schmidt_number)
from mmsqueeze.errors import DegenerateSpectrumError, InsufficientModesError
from mmsqueeze.estimation import estimate_mu_from_g2
from mmsqueeze.correlations import g2_twin_lowgain
from mmsqueeze.spectral import FrequencyGrid, JointSpectralAmplitude

from conftest import W0


def grid(n_s, n_i, step_s=1.0, step_i=1.0):
    return FrequencyGrid(0.0, step_s, n_s, 0.0, step_i, n_i)


def complex_matrices(max_side=12):
    side = st.integers(2, max_side)
    return st.tuples(side, side).flatmap(
        lambda shape: st.tuples(
            arrays(float, shape, elements=st.floats(-1, 1)),
            arrays(float, shape, elements=st.floats(-1, 1)),
        )
    ).map(lambda pair: pair[0] + 1j * pair[1]).filter(lambda m: np.abs(m).max() > 1e-3)


class TestSqueezerSpectrum:
    def test_from_r_sorts_and_splits(self):
        sp = SqueezerSpectrum.from_r([0.3, 0.4])
        assert np.allclose(sp.r, [0.4, 0.3])
        assert sp.B == pytest.approx(0.5, rel=1e-15)
        assert np.allclose(sp.lam, [0.8, 0.6], rtol=1e-15)

    def test_from_lambda_normalises(self):
        sp = SqueezerSpectrum.from_lambda([1, 1, 1, 1], 2.0)
        assert np.allclose(sp.lam, 0.5)
        assert np.allclose(sp.r, 1.0)

    def test_vacuum_allowed(self):
        sp = SqueezerSpectrum.from_lambda([1.0], 0.0)
        assert sp.B == 0 and sp.r[0] == 0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            SqueezerSpectrum.from_r([0.1, -0.2])

    def test_rejects_unsorted_direct_construction(self):
        with pytest.raises(ValueError):
            SqueezerSpectrum(np.array([0.1, 0.2]), 1.0, np.array([0.1, 0.2]))

    def test_thermal_distribution(self):
        sp = SqueezerSpectrum.thermal(0.5, 1.0)
        k = np.arange(sp.n_modes)
        assert np.allclose(sp.lam, np.sqrt(0.75) * 0.5 ** k, rtol=1e-12, atol=1e-300)

    @given(arrays(float, st.integers(1, 40), elements=st.floats(0, 5)), st.floats(1e-3, 3))
    def test_invariants(self, lam, B):
        if lam.max() == 0:
            return
        sp = SqueezerSpectrum.from_lambda(lam, B)
        assert abs(np.sum(sp.lam ** 2) - 1) < 1e-10
        assert np.all(np.abs(sp.r - sp.B * sp.lam) <= 1e-10)
        assert np.all(np.diff(sp.r) <= 0)


class TestSchmidtDecompose:
    def test_separable_is_single_mode(self):
        g = FrequencyGrid.centered(W0, W0, 4e12, 3e12, 64, 48)
        ws, wi = g.mesh()
        f = np.exp(-((ws - W0) / 1e12) ** 2) * np.exp(-((wi - W0) / 7e11) ** 2) * (1 + 0.5j)
        sp, modes = schmidt_decompose(JointSpectralAmplitude(g, f))
        assert sp.n_modes == 1
        assert np.allclose(sp.lam, [1.0])
        assert schmidt_number(sp) == pytest.approx(1.0, abs=1e-12)

    def test_diagonal_kernel(self):
        sp, _ = schmidt_decompose(JointSpectralAmplitude(grid(2, 2), np.diag([3.0, 4.0])))
        assert np.allclose(sp.lam, [0.8, 0.6], rtol=1e-14)
        assert sp.B == pytest.approx(5.0, rel=1e-14)

    def test_continuum_scaling(self):
        # r_k = s_k * sqrt(d_s d_i)
        sp, _ = schmidt_decompose(JointSpectralAmplitude(grid(2, 2, 0.25, 4.0), np.diag([3.0, 4.0])))
        assert np.allclose(sp.r, [4.0, 3.0], rtol=1e-14)

    def test_degenerate(self):
        with pytest.raises(DegenerateSpectrumError, match="degenerate spectrum"):
            schmidt_decompose(JointSpectralAmplitude(grid(4, 4), np.zeros((4, 4))))

    def test_double_gaussian_is_thermal(self, pdc_jsa):
        sp, _ = schmidt_decompose(pdc_jsa)
        fit = fit_thermal(sp)
        assert fit.residual < 1e-3
        mu_g2 = estimate_mu_from_g2(g2_twin_lowgain(sp).value).value
        assert abs(fit.mu - mu_g2) < 1e-3

    def test_phase_convention(self, pdc_jsa):
        _, modes = schmidt_decompose(pdc_jsa.scaled(np.exp(0.7j)))
        peak = modes.psi[np.arange(modes.psi.shape[0]), np.argmax(np.abs(modes.psi), axis=1)]
        assert np.allclose(peak.imag, 0, atol=1e-12)
        assert np.all(peak.real > 0)

    @settings(max_examples=60, deadline=None)
    @given(complex_matrices(), st.floats(0.01, 100))
    def test_reconstruction_orthonormality_scale(self, values, c):
        g = grid(*values.shape, step_s=0.3, step_i=1.7)
        jsa = JointSpectralAmplitude(g, values)
        sp, modes = schmidt_decompose(jsa)
        rec = reconstruct(sp, modes)
        assert np.linalg.norm(rec - values) / np.linalg.norm(values) < 1e-8
        m = sp.n_modes
        assert np.allclose(modes.overlap_signal(), np.eye(m), atol=1e-8)
        assert np.allclose(modes.overlap_idler(), np.eye(m), atol=1e-8)
        sp_c, _ = schmidt_decompose(jsa.scaled(c))
        if sp_c.n_modes == sp.n_modes:
            assert np.allclose(sp_c.lam, sp.lam, atol=1e-10, rtol=0)
        assert sp_c.B == pytest.approx(c * sp.B, rel=1e-10)
        K = schmidt_number(sp)
        assert K >= 1 - 1e-12
        if sp.n_modes == 1:
            assert K == pytest.approx(1.0, abs=1e-12)
        else:
            assert K > 1


class TestSchmidtNumber:
    def test_single(self):
        assert schmidt_number(SqueezerSpectrum.from_lambda([1.0], 1.0)) == 1.0

    def test_two_modes(self):
        assert schmidt_number(SqueezerSpectrum.from_r([0.8, 0.6])) == pytest.approx(1.8545994065281899, rel=1e-14)

    def test_thermal_closed_form(self):
        # oracle: 200-term sum of lambda^4 with lambda_k = sqrt(1 - mu^2) mu^k
        mu = 0.6
        brute = 1.0 / sum((np.sqrt(1 - mu * mu) * mu ** k) ** 4 for k in range(200))
        assert brute == pytest.approx(2.125, rel=1e-14)
        assert schmidt_number(SqueezerSpectrum.thermal(mu, 1.0)) == pytest.approx(brute, rel=1e-12)


class TestFitThermal:
    def test_exact_geometric(self):
        lam = np.sqrt(1 - 0.25) * 0.5 ** np.arange(12)
        fit = fit_thermal(SqueezerSpectrum.from_lambda(lam, 1.0))
        assert fit.mu == pytest.approx(0.5, rel=1e-12)
        assert fit.residual < 1e-10

    def test_insufficient_modes(self):
        sp = SqueezerSpectrum.from_lambda([0.8, 0.6, 0.0, 0.0], 1.0)
        with pytest.raises(InsufficientModesError, match="insufficient modes for thermal fit"):
            fit_thermal(sp)

    def test_floor_excludes_tiny_modes(self):
        lam = np.concatenate([np.sqrt(1 - 0.25) * 0.5 ** np.arange(6), [1e-9, 1e-10]])
        fit = fit_thermal(SqueezerSpectrum.from_lambda(lam, 1.0))
        assert fit.n_used == 6
        assert fit.mu == pytest.approx(0.5, rel=1e-12)
