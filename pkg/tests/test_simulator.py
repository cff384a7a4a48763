import math

import numpy as np
import pytest

from mmsqueeze.correlations import g2_single, g2_twin, g3_single, g11_twin
from mmsqueeze.decomposition import SqueezerSpectrum
from mmsqueeze.errors import DomainError, NoCountsError
from mmsqueeze.simulator import (DetectorModel, PulseEnsemble, draw_single_modes, draw_twin_modes,
                                 estimate_correlations, hbt_click_estimate_g2, sample_single_beam,
                                 sample_twin_beam, squeezed_vacuum_cdf)

from oracles import squeezed_vacuum_pmf

N = 10 ** 6


def by_order(results):
    return {r.order: r for r in results}


def click_ratio_thermal(nbar, p1, p2):
    """Expected P12/(P1 P2) for a thermal count split into arms with detection probabilities p1, p2.

    For geometric N, E[(1-p)^N] = 1/(1 + nbar p).
    """
    none1 = 1 / (1 + nbar * p1)
    none2 = 1 / (1 + nbar * p2)
    none12 = 1 / (1 + nbar * (p1 + p2))
    return (1 - none1 - none2 + none12) / ((1 - none1) * (1 - none2))


class TestDetector:
    def test_defaults(self):
        d = DetectorModel(0.3)
        assert d.efficiency_idler == 0.3 and d.mode == "number_resolving"

    @pytest.mark.parametrize("eta", [0.0, -0.1, 1.01])
    def test_efficiency_guard(self, eta):
        with pytest.raises(ValueError):
            DetectorModel(eta)

    def test_mode_guard(self):
        with pytest.raises(ValueError):
            DetectorModel(1.0, mode="spad")


class TestTwinSampling:
    def test_vacuum(self):
        ens = sample_twin_beam(SqueezerSpectrum.from_lambda([1.0, 0.3], 0.0), DetectorModel(), 5000, seed=1)
        assert not ens.signal.any() and not ens.idler.any()
        assert ens.records.shape == (5000, 2)

    def test_geometric_mean(self):
        ens = sample_twin_beam(SqueezerSpectrum.from_r([math.asinh(1.0)]), DetectorModel(), N, seed=11)
        assert abs(ens.signal.mean() - 1.0) < 0.004
        # geometric with mean 1: variance n(n+1) = 2
        assert ens.signal.var() == pytest.approx(2.0, rel=0.02)

    def test_preloss_counts_equal(self):
        ens = sample_twin_beam(SqueezerSpectrum.thermal(0.5, 0.8), DetectorModel(1.0), 200_000, seed=3)
        assert np.array_equal(ens.signal, ens.idler)

    def test_per_mode_draws(self):
        rng = np.random.default_rng(5)
        cols = draw_twin_modes(rng, np.array([0.5, 0.1]), 400_000)
        assert cols.shape == (400_000, 2)
        assert np.allclose(cols.mean(axis=0), [0.5, 0.1], rtol=0.02)

    def test_thinning(self):
        sp = SqueezerSpectrum.from_r([0.8, 0.5])
        full = sample_twin_beam(sp, DetectorModel(1.0), N, seed=21)
        half = sample_twin_beam(sp, DetectorModel(0.5, 1.0), N, seed=21)
        assert half.signal.mean() == pytest.approx(0.5 * full.signal.mean(), rel=0.01)
        g_full = by_order(estimate_correlations(full, ["g2"]))["g2"]
        g_half = by_order(estimate_correlations(half, ["g2"]))["g2"]
        assert abs(g_full.value - g_half.value) < 3 * math.hypot(g_full.stderr, g_half.stderr)

    def test_single_mode_g2_is_two(self):
        ens = sample_twin_beam(SqueezerSpectrum.from_r([0.6]), DetectorModel(), N, seed=31)
        g = by_order(estimate_correlations(ens, ["g2"]))["g2"]
        assert abs(g.value - 2.0) < 3 * g.stderr

    def test_loss_invariance(self):
        sp = SqueezerSpectrum.from_r([0.7, 0.3])
        ref = by_order(estimate_correlations(sample_twin_beam(sp, DetectorModel(), N, seed=41), ["g2", "g3", "g11"]))
        lossy = by_order(estimate_correlations(sample_twin_beam(sp, DetectorModel(0.1), N, seed=42),
                                               ["g2", "g3", "g11"]))
        for k in ("g2", "g3", "g11"):
            assert abs(ref[k].value - lossy[k].value) < 3 * math.hypot(ref[k].stderr, lossy[k].stderr)

    def test_closed_form_agreement(self):
        sp = SqueezerSpectrum.thermal(0.5, 0.6, n_modes=4)
        est = by_order(estimate_correlations(sample_twin_beam(sp, DetectorModel(0.4), N, seed=51), ["g2", "g11"]))
        assert abs(est["g2"].value - g2_twin(sp).value) < 3 * est["g2"].stderr
        assert abs(est["g11"].value - g11_twin(sp).value) < 3 * est["g11"].stderr


class TestSingleSampling:
    def test_parity(self):
        ens = sample_single_beam(SqueezerSpectrum.from_r([0.9, 0.6, 0.2]), DetectorModel(), 100_000, seed=7)
        assert np.all(ens.signal % 2 == 0)
        assert not ens.idler.any()
        cols = draw_single_modes(np.random.default_rng(0), [squeezed_vacuum_cdf(0.9)], 10_000)
        assert np.all(cols % 2 == 0)

    def test_cdf_against_oracle(self):
        cdf = squeezed_vacuum_cdf(1.2)
        pmf = squeezed_vacuum_pmf(1.2)[::2]
        assert cdf[-1] >= 1 - 1e-12
        assert np.allclose(cdf, np.cumsum(pmf)[:cdf.size], rtol=0, atol=1e-14)

    def test_mean_and_g2(self):
        sp = SqueezerSpectrum.from_r([0.5])
        ens = sample_single_beam(sp, DetectorModel(), N, seed=61)
        n = ens.signal
        nbar = math.sinh(0.5) ** 2
        assert abs(n.mean() - nbar) < 3 * n.std() / math.sqrt(N)
        g = by_order(estimate_correlations(ens, ["g2", "g3"]))
        assert abs(g["g2"].value - g2_single(sp).value) < 3 * g["g2"].stderr
        assert abs(g["g3"].value - g3_single(sp).value) < 3 * g["g3"].stderr

    def test_tail_guard(self):
        with pytest.raises(DomainError, match="tail truncation unsafe"):
            sample_single_beam(SqueezerSpectrum.from_r([5.5]), DetectorModel(), 1000, seed=0)


class TestEstimators:
    def _ensemble(self, signal, idler=None):
        signal = np.asarray(signal, dtype=np.int64)
        idler = np.zeros_like(signal) if idler is None else np.asarray(idler, dtype=np.int64)
        return PulseEnsemble(signal.size, signal, idler, 0, "x")

    @pytest.mark.parametrize("c", [2, 3, 7])
    def test_deterministic_records(self, c):
        g = estimate_correlations(self._ensemble(np.full(1000, c)), ["g2"])[0]
        assert g.value == pytest.approx((c - 1) / c, rel=1e-14)
        assert g.stderr == pytest.approx(0.0, abs=1e-14)

    def test_no_counts(self):
        with pytest.raises(NoCountsError, match="no counts"):
            estimate_correlations(self._ensemble(np.zeros(1000)), ["g2"])

    def test_min_pulses(self):
        with pytest.raises(ValueError):
            estimate_correlations(self._ensemble(np.ones(50)), ["g2"])

    def test_cross_estimator(self):
        s = np.array([0, 1, 2, 3] * 250)
        i = np.array([1, 1, 2, 2] * 250)
        g = estimate_correlations(self._ensemble(s, i), ["g11"])[0]
        assert g.value == pytest.approx(np.mean(s * i) / (s.mean() * i.mean()), rel=1e-14)

    def test_record_count_guard(self):
        with pytest.raises(ValueError):
            PulseEnsemble(3, np.zeros(2, dtype=np.int64), np.zeros(2, dtype=np.int64), 0, "x")


class TestClickEstimator:
    def test_low_flux(self):
        sp = SqueezerSpectrum.from_r([math.asinh(0.1)])  # nbar = 0.01
        ens = sample_twin_beam(sp, DetectorModel(0.6), 10 ** 7, seed=20240601)
        g = hbt_click_estimate_g2(ens, 0.5)
        assert abs(g.value - 2.0) / 2.0 < 0.05
        expected = click_ratio_thermal(0.01, 0.3, 0.3)
        assert abs(expected - 2.0) / 2.0 < 0.05
        assert abs(g.value - expected) < 3 * g.stderr

    def test_saturation_bias(self):
        sp = SqueezerSpectrum.from_r([math.asinh(1.0)])  # nbar = 1
        ens = sample_twin_beam(sp, DetectorModel(0.6), N, seed=77)
        click = hbt_click_estimate_g2(ens, 0.5)
        fm = by_order(estimate_correlations(ens, ["g2"]))["g2"]
        assert fm.value - click.value > 3 * math.hypot(click.stderr, fm.stderr)
        assert abs(click.value - click_ratio_thermal(1.0, 0.3, 0.3)) < 3 * click.stderr

    def test_no_counts_in_arm_2(self):
        ens = sample_twin_beam(SqueezerSpectrum.from_r([0.5]), DetectorModel(), 1000, seed=1)
        with pytest.raises(NoCountsError, match="no counts in arm 2"):
            hbt_click_estimate_g2(ens, 0.0)


class TestDeterminism:
    @pytest.mark.parametrize("beam", ["twin", "single"])
    def test_workers(self, beam):
        sp = SqueezerSpectrum.from_r([0.6, 0.2])
        fn = sample_twin_beam if beam == "twin" else sample_single_beam
        n = 3 * 65536 + 123
        a = fn(sp, DetectorModel(0.7), n, seed=9, workers=1)
        b = fn(sp, DetectorModel(0.7), n, seed=9, workers=4)
        c = fn(sp, DetectorModel(0.7), n, seed=9)
        assert np.array_equal(a.records, b.records) and np.array_equal(a.records, c.records)
        assert a.spectrum_hash == b.spectrum_hash

    def test_seed_changes_records(self):
        sp = SqueezerSpectrum.from_r([0.6])
        a = sample_twin_beam(sp, DetectorModel(), 10_000, seed=1)
        b = sample_twin_beam(sp, DetectorModel(), 10_000, seed=2)
        assert not np.array_equal(a.records, b.records)

    def test_prefix_stable(self):
        # a longer run extends a shorter one without changing its records
        sp = SqueezerSpectrum.from_r([0.6])
        a = sample_twin_beam(sp, DetectorModel(), 65536, seed=4)
        b = sample_twin_beam(sp, DetectorModel(), 2 * 65536, seed=4)
        assert np.array_equal(a.records, b.records[:65536])
