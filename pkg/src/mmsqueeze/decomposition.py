"""Schmidt decomposition of a JSA into independent broadband squeezers.

Continuum scaling: a JSA matrix ``F`` sampled with steps ``d_s``, ``d_i``
has singular values ``s_k``; the squeezing amplitudes of the continuous
kernel are ``r_k = s_k * sqrt(d_s * d_i)`` and the mode functions are the
singular vectors divided by ``sqrt(step)``, so that
``sum(|psi_k|**2) * d_s == 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrumError, DomainError, InsufficientModesError
from .spectral import FrequencyGrid, JointSpectralAmplitude

TRUNCATION = 1e-12
FIT_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class SqueezerSpectrum:
    """Squeezing amplitudes ``r_k = B * lambda_k`` with ``sum(lambda_k**2) == 1``.

    Build with :meth:`from_r` or :meth:`from_lambda` rather than directly.
    ``B == 0`` is allowed and describes vacuum.
    """

    r: np.ndarray
    B: float
    lam: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        lam = np.asarray(self.lam, dtype=float)
        if r.ndim != 1 or r.size == 0:
            raise ValueError("spectrum needs at least one mode")
        if np.any(r < 0) or np.any(lam < 0):
            raise ValueError("squeezing amplitudes must be non-negative")
        if np.any(np.diff(r) > 0):
            raise ValueError("squeezing amplitudes must be sorted descending")
        r.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "B", float(self.B))

    @classmethod
    def from_r(cls, r) -> "SqueezerSpectrum":
        r = np.sort(np.asarray(r, dtype=float).ravel())[::-1]
        if r.size == 0 or not np.all(np.isfinite(r)):
            raise ValueError("squeezing amplitudes must be finite and non-empty")
        if np.any(r < 0):
            raise ValueError("squeezing amplitudes must be non-negative")
        B = float(np.linalg.norm(r))
        lam = r / B if B > 0 else np.zeros_like(r)
        return cls(r, B, lam)

    @classmethod
    def from_lambda(cls, lam, B: float) -> "SqueezerSpectrum":
        """Normalise ``lam`` to unit 2-norm and scale it by the gain ``B``."""
        lam = np.sort(np.asarray(lam, dtype=float).ravel())[::-1]
        if B < 0:
            raise ValueError("gain must be non-negative")
        if lam.size == 0 or not np.all(np.isfinite(lam)) or lam[0] <= 0:
            raise DegenerateSpectrumError("degenerate spectrum: all mode weights are zero")
        lam = lam / lam[0]
        lam = lam / np.sqrt(np.sum(lam * lam))
        return cls(B * lam, B, lam)

    @classmethod
    def thermal(cls, mu: float, B: float, n_modes: int | None = None) -> "SqueezerSpectrum":
        """Geometric distribution ``lambda_k = sqrt(1 - mu**2) mu**k``.

        Without ``n_modes`` the series is cut where ``mu**k`` drops below
        1e-17 (relative), i.e. beyond double precision.
        """
        if not 0 <= mu < 1:
            raise ValueError("thermal parameter must lie in [0, 1)")
        if n_modes is None:
            n_modes = 1 if mu == 0 else int(np.ceil(np.log(1e-17) / np.log(mu))) + 1
        k = np.arange(n_modes)
        lam = np.sqrt(1 - mu * mu) * mu ** k
        return cls.from_lambda(lam, B)

    @classmethod
    def uniform(cls, n_modes: int, B: float) -> "SqueezerSpectrum":
        return cls.from_lambda(np.ones(int(n_modes)), B)

    def with_gain(self, B: float) -> "SqueezerSpectrum":
        return SqueezerSpectrum(B * self.lam, B, self.lam)

    @property
    def n_modes(self) -> int:
        return self.r.size

    @property
    def lambda_(self) -> np.ndarray:
        return self.lam

    def to_dict(self) -> dict:
        return {"r": self.r.tolist(), "B": self.B, "lambda": self.lam.tolist()}


@dataclass(frozen=True, eq=False)
class SchmidtModes:
    """Quadrature-orthonormal mode functions, one row per mode."""

    psi: np.ndarray
    phi: np.ndarray
    grid: FrequencyGrid

    def overlap_signal(self) -> np.ndarray:
        return self.psi.conj() @ self.psi.T * self.grid.step_s

    def overlap_idler(self) -> np.ndarray:
        return self.phi.conj() @ self.phi.T * self.grid.step_i


@dataclass(frozen=True)
class ThermalModeFit:
    mu: float
    residual: float
    n_used: int


def schmidt_decompose(jsa: JointSpectralAmplitude) -> tuple[SqueezerSpectrum, SchmidtModes]:
    grid = jsa.grid
    values = jsa.values
    if not np.all(np.isfinite(values)):
        raise DomainError("JSA contains non-finite entries")
    if not np.any(values != 0):
        raise DegenerateSpectrumError("degenerate spectrum: JSA is identically zero")

    u, s, vh = np.linalg.svd(values, full_matrices=False)
    keep = s >= TRUNCATION * s[0]
    u, s, vh = u[:, keep], s[keep], vh[keep, :]

    # largest-magnitude entry of each psi_k made real-positive; phi takes the conjugate phase
    idx = np.argmax(np.abs(u), axis=0)
    phase = u[idx, np.arange(u.shape[1])]
    phase = phase / np.abs(phase)
    u = u * phase.conj()[None, :]
    vh = vh * phase[:, None]

    r = s * np.sqrt(grid.step_s * grid.step_i)
    spectrum = SqueezerSpectrum.from_r(r)
    modes = SchmidtModes(psi=(u.T / np.sqrt(grid.step_s)), phi=(vh / np.sqrt(grid.step_i)), grid=grid)
    return spectrum, modes


def reconstruct(spectrum: SqueezerSpectrum, modes: SchmidtModes) -> np.ndarray:
    """Rebuild the sampled JSA from ``sum_k r_k psi_k(w_s) phi_k(w_i)``."""
    return (modes.psi.T * spectrum.r[None, :]) @ modes.phi


def schmidt_number(spectrum: SqueezerSpectrum) -> float:
    lam = spectrum.lam
    return float(1.0 / np.sum(lam ** 4))


def fit_thermal(spectrum: SqueezerSpectrum) -> ThermalModeFit:
    """Least-squares line through ``log(lambda_k)`` against ``k``; ``mu = exp(slope)``.

    Modes below ``1e-6 * lambda_0`` are left out of the fit.
    """
    lam = spectrum.lam
    if lam.size == 0 or lam[0] <= 0:
        raise InsufficientModesError("insufficient modes for thermal fit")
    usable = lam[lam >= FIT_FLOOR * lam[0]]
    if usable.size < 3:
        raise InsufficientModesError(
            f"insufficient modes for thermal fit: {usable.size} above {FIT_FLOOR:g} of the leading mode")
    k = np.arange(usable.size, dtype=float)
    y = np.log(usable)
    slope, intercept = np.polyfit(k, y, 1)
    resid = y - (slope * k + intercept)
    mu = float(np.exp(slope))
    if mu >= 1:
        raise DomainError(f"mode weights do not decay (fitted mu = {mu:.6g})")
    return ThermalModeFit(mu=mu, residual=float(np.sqrt(np.mean(resid ** 2))), n_used=int(usable.size))
