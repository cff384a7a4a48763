"""Joint spectral amplitudes of PDC and FWM twin-beam sources.

The JSA is sampled on a uniform ``FrequencyGrid`` and stored as a complex
``(n_s, n_i)`` matrix.  All physical constants (nonlinearity, pump energy,
mode overlap) are merged into a single ``coupling_scale``.

The pump envelope is a normalisable Gaussian,
``alpha(w) = A_p * exp(-(w - mu_p)**2 / (2 sigma_p**2))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

GAUSSIAN_SINC_FACTOR = 0.193
MIN_PUMP_QUADRATURE = 16
PUMP_SPAN_SIGMAS = 5.0

Phasematching = Literal["exact_sinc", "gaussian_approx"]


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform signal/idler angular-frequency axes (rad/s)."""

    start_s: float
    step_s: float
    n_s: int
    start_i: float
    step_i: float
    n_i: int

    def __post_init__(self):
        if not (self.step_s > 0 and self.step_i > 0):
            raise ValueError("grid steps must be positive")
        if self.n_s < 2 or self.n_i < 2:
            raise ValueError("grid needs at least 2 points per axis")

    @classmethod
    def centered(cls, center_s, center_i, half_width_s, half_width_i, n_s=128, n_i=None):
        """Grid of ``n`` nodes spanning ``center +- half_width`` on each axis."""
        n_i = n_s if n_i is None else n_i
        if n_s < 2 or n_i < 2:
            raise ValueError("grid needs at least 2 points per axis")
        step_s = 2.0 * half_width_s / (n_s - 1)
        step_i = 2.0 * half_width_i / (n_i - 1)
        return cls(center_s - half_width_s, step_s, int(n_s),
                   center_i - half_width_i, step_i, int(n_i))

    @property
    def omega_s(self) -> np.ndarray:
        return self.start_s + np.arange(self.n_s) * self.step_s

    @property
    def omega_i(self) -> np.ndarray:
        return self.start_i + np.arange(self.n_i) * self.step_i

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_s, self.n_i)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.omega_s, self.omega_i, indexing="ij")

    def refined(self, factor: int = 2) -> "FrequencyGrid":
        """Same span, ``factor`` times more intervals per axis."""
        n_s = (self.n_s - 1) * factor + 1
        n_i = (self.n_i - 1) * factor + 1
        return FrequencyGrid(self.start_s, self.step_s / factor, n_s,
                             self.start_i, self.step_i / factor, n_i)

    def to_dict(self) -> dict:
        return {"start_s": self.start_s, "step_s": self.step_s, "n_s": self.n_s,
                "start_i": self.start_i, "step_i": self.step_i, "n_i": self.n_i}


@dataclass(frozen=True)
class PumpEnvelope:
    amplitude: float
    central_frequency: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("pump width must be positive")
        if not self.amplitude > 0:
            raise ValueError("pump amplitude must be positive")

    def __call__(self, omega):
        x = (np.asarray(omega, dtype=float) - self.central_frequency) / self.width
        return self.amplitude * np.exp(-0.5 * x * x)


@dataclass(frozen=True)
class FieldDispersion:
    """Second-order Taylor expansion of k(w) around ``omega0``.

    ``k(w) = k0 + k1 (w - omega0) + k2 (w - omega0)**2 / 2``
    """

    omega0: float
    k0: float = 0.0
    k1: float = 0.0
    k2: float = 0.0

    def wavenumber(self, omega):
        d = np.asarray(omega, dtype=float) - self.omega0
        return self.k0 + self.k1 * d + 0.5 * self.k2 * d * d


@dataclass(frozen=True)
class DispersionModel:
    pump: FieldDispersion
    signal: FieldDispersion
    idler: FieldDispersion
    # second pump for FWM; defaults to ``pump``
    pump2: FieldDispersion | None = None

    @property
    def second_pump(self) -> FieldDispersion:
        return self.pump if self.pump2 is None else self.pump2

    def is_symmetric(self) -> bool:
        s, i = self.signal, self.idler
        return (s.omega0, s.k0, s.k1, s.k2) == (i.omega0, i.k0, i.k1, i.k2)


@dataclass(frozen=True)
class JointSpectralAmplitude:
    grid: FrequencyGrid
    values: np.ndarray
    coupling_scale: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("JSA contains non-finite entries")
        object.__setattr__(self, "values", values)

    def frobenius_norm(self) -> float:
        """Continuum L2 norm of the kernel (matrix norm times sqrt(d_s d_i))."""
        return float(np.linalg.norm(self.values) * np.sqrt(self.grid.step_s * self.grid.step_i))

    def scaled(self, c: float) -> "JointSpectralAmplitude":
        return JointSpectralAmplitude(self.grid, self.values * c, self.coupling_scale * c, dict(self.meta))


def phase_mismatch(dispersion: DispersionModel, omega_s, omega_i):
    """``k_p(w_s + w_i) - k_s(w_s) - k_i(w_i)`` in 1/m; broadcasts over arrays."""
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    return (dispersion.pump.wavenumber(omega_s + omega_i)
            - dispersion.signal.wavenumber(omega_s)
            - dispersion.idler.wavenumber(omega_i))


def fwm_phase_mismatch(dispersion: DispersionModel, omega_p, omega_s, omega_i):
    """``k_p1(w_p) + k_p2(w_s + w_i - w_p) - k_s(w_s) - k_i(w_i)``."""
    omega_p = np.asarray(omega_p, dtype=float)
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    return (dispersion.pump.wavenumber(omega_p)
            + dispersion.second_pump.wavenumber(omega_s + omega_i - omega_p)
            - dispersion.signal.wavenumber(omega_s)
            - dispersion.idler.wavenumber(omega_i))


def phasematching_function(half_phase, kind: Phasematching = "exact_sinc"):
    """``sinc(x)`` (unnormalised, sinc(0)=1) or its Gaussian stand-in ``exp(-0.193 x**2)``."""
    x = np.asarray(half_phase, dtype=float)
    if kind == "exact_sinc":
        # np.sinc is sin(pi x)/(pi x)
        return np.sinc(x / np.pi)
    if kind == "gaussian_approx":
        return np.exp(-GAUSSIAN_SINC_FACTOR * x * x)
    raise ValueError(f"unknown phasematching kind {kind!r}")


def _check_common(length, grid):
    if not length > 0:
        raise ValueError("medium length must be positive")
    if grid.n_s < 2 or grid.n_i < 2:
        raise ValueError("grid needs at least 2 points per axis")


def build_pdc_jsa(pump: PumpEnvelope, dispersion: DispersionModel, length: float,
                  grid: FrequencyGrid, phasematching: Phasematching = "exact_sinc",
                  coupling_scale: float = 1.0) -> JointSpectralAmplitude:
    """PDC joint spectral amplitude ``c * alpha(w_s + w_i) * phi(w_s, w_i)``."""
    _check_common(length, grid)
    ws, wi = grid.mesh()
    dk = phase_mismatch(dispersion, ws, wi)
    values = coupling_scale * pump(ws + wi) * phasematching_function(0.5 * dk * length, phasematching)
    return JointSpectralAmplitude(grid, values.astype(complex), coupling_scale,
                                  {"process": "pdc", "phasematching": phasematching})


def pump_quadrature_axis(pump1: PumpEnvelope, n_quad: int):
    """Trapezoid nodes and weights covering ``mu_1 +- 5 sigma_1``.

    The FWM integrand carries ``alpha_1(w_p)`` as a factor, so the first
    envelope bounds the support of the integrand.
    """
    if n_quad < MIN_PUMP_QUADRATURE:
        raise ValueError(f"pump quadrature needs at least {MIN_PUMP_QUADRATURE} nodes, got {n_quad}")
    half = PUMP_SPAN_SIGMAS * pump1.width
    nodes = np.linspace(pump1.central_frequency - half, pump1.central_frequency + half, n_quad)
    weights = np.full(n_quad, nodes[1] - nodes[0])
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return nodes, weights


def build_fwm_jsa(pump1: PumpEnvelope, pump2: PumpEnvelope, dispersion: DispersionModel,
                  length: float, grid: FrequencyGrid, coupling_scale: float = 1.0,
                  n_quad: int = 256, phasematching: Phasematching = "exact_sinc") -> JointSpectralAmplitude:
    """FWM joint spectral amplitude by trapezoid quadrature over the first pump frequency.

    ``f(w_s, w_i) = int dw_p alpha_1(w_p) alpha_2(w_s + w_i - w_p) sinc(dk L / 2)``
    """
    _check_common(length, grid)
    nodes, weights = pump_quadrature_axis(pump1, n_quad)
    ws, wi = grid.mesh()
    total = ws + wi
    acc = np.zeros(grid.shape)
    # sequential accumulation in node order keeps the fill bit-reproducible
    for wp, w in zip(nodes, weights):
        dk = fwm_phase_mismatch(dispersion, wp, ws, wi)
        acc += (w * pump1(wp)) * pump2(total - wp) * phasematching_function(0.5 * dk * length, phasematching)
    return JointSpectralAmplitude(grid, (coupling_scale * acc).astype(complex), coupling_scale,
                                  {"process": "fwm", "n_quad": n_quad, "phasematching": phasematching})


def auto_grid(pump: PumpEnvelope, dispersion: DispersionModel, length: float,
              n: int = 128, n_sigma: float = 4.0) -> FrequencyGrid:
    """Grid spanning ``+- n_sigma`` marginal standard deviations of the PDC intensity.

    Uses the double-Gaussian model (first-order dispersion, Gaussian
    phasematching) to locate the spectrum; adequate for choosing a window
    even when the exact sinc is used afterwards.
    """
    p, s, i = dispersion.pump, dispersion.signal, dispersion.idler
    # Linearised in nu = w - omega0 per arm:
    #   pump term:  (nu_s + nu_i - d) / sigma_p
    #   dk        = a nu_s + b nu_i + e
    d = pump.central_frequency - s.omega0 - i.omega0
    a = p.k1 - s.k1
    b = p.k1 - i.k1
    e = p.k0 - s.k0 - i.k0 + p.k1 * (s.omega0 + i.omega0 - p.omega0)
    c = 2.0 * GAUSSIAN_SINC_FACTOR * (length / 2.0) ** 2
    inv_var = 1.0 / pump.width ** 2
    # amplitude = exp(-0.5 x^T M x + h^T x + const)
    M = inv_var * np.ones((2, 2)) + c * np.outer([a, b], [a, b])
    h = inv_var * d * np.ones(2) - c * e * np.array([a, b])
    if np.linalg.cond(M) > 1e12:
        raise ValueError("spectrum is not localised in both arms; supply an explicit grid")
    center = np.linalg.solve(M, h)
    # |f|^2 ~ exp(-x^T M x): covariance (2M)^-1
    cov = np.linalg.inv(2.0 * M)
    sd = np.sqrt(np.diag(cov))
    return FrequencyGrid.centered(s.omega0 + center[0], i.omega0 + center[1],
                                  n_sigma * sd[0], n_sigma * sd[1], n, n)
