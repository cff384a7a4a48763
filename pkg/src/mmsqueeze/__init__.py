"""Characterization of spectrally multimode squeezed light.

Build joint spectral amplitudes, split them into independent broadband
squeezers, evaluate broadband correlation functions, invert them for the
mode number, thermal parameter and gain, and check everything against a
Monte-Carlo photon-counting model with detector loss.
"""
from .correlations import (CorrelationValue, MeanPhoton, g2_single, g2_twin, g2_twin_lowgain, g3_single,
                           g11_twin, gn_twin, gnm_twin_cross, mean_photon)
from .decomposition import (SchmidtModes, SqueezerSpectrum, ThermalModeFit, fit_thermal, schmidt_decompose,
                            schmidt_number)
from .errors import (ConfigError, DegenerateSpectrumError, DomainError, InsufficientModesError, MMSqueezeError,
                     NoCountsError)
from .estimation import (EstimationResult, SlopeCurve, estimate_B_from_g11, estimate_B_single_from_g2,
                         estimate_K_from_g2, estimate_mu_from_g2, map_slope_to_K, map_slope_to_mu,
                         sweep_single_beam_curve)
from .simulator import (DetectorModel, EstimatedCorrelation, PulseEnsemble, estimate_correlations,
                        hbt_click_estimate_g2, sample_single_beam, sample_twin_beam)
from .spectral import (DispersionModel, FieldDispersion, FrequencyGrid, JointSpectralAmplitude, PumpEnvelope,
                       build_fwm_jsa, build_pdc_jsa, phase_mismatch)

__version__ = "0.1.0"
