"""Inversion of measured correlation values into K, mu and the gain B."""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import bisect

from .correlations import g11_twin, g2_single, g3_single
from .decomposition import SqueezerSpectrum
from .errors import DomainError

B_BRACKET = (1e-6, 10.0)
SLOPE_WINDOW = (0.01, 0.3)
SLOPE_POINTS = 32
SINGLE_LOWGAIN_G2 = 100.0
_MU_TABLE = np.linspace(0.0, 0.95, 96)
_K_TABLE = np.arange(1, 65)


@dataclass(frozen=True)
class EstimationResult:
    quantity: str
    value: float
    method: str
    valid_domain_note: str = ""

    def to_dict(self) -> dict:
        return {"quantity": self.quantity, "value": self.value, "method": self.method,
                "valid_domain_note": self.valid_domain_note}


@dataclass(frozen=True)
class SlopeCurve:
    B: np.ndarray
    points: np.ndarray  # (n, 2) columns g2, g3
    slope: float
    intercept: float

    def __post_init__(self):
        if self.points.shape[0] < 8:
            raise ValueError("slope curve needs at least 8 points")
        if np.any(np.diff(self.B) <= 0):
            raise ValueError("slope curve must be ordered by increasing B")


def estimate_K_from_g2(g2: float) -> EstimationResult:
    if not 1.0 < g2 <= 2.0:
        raise DomainError(f"g2={g2} outside twin-beam low-gain domain (1, 2]")
    return EstimationResult("K", 1.0 / (g2 - 1.0), "K = 1/(g2 - 1)",
                            "low gain, twin beam; K is the effective (uniform-equivalent) mode number")


def estimate_mu_from_g2(g2: float) -> EstimationResult:
    if not 1.0 <= g2 <= 2.0:
        raise DomainError(f"g2={g2} outside twin-beam low-gain domain [1, 2]")
    mu = float(np.sqrt(max(2.0 / g2 - 1.0, 0.0)))
    return EstimationResult("mu", mu, "mu = sqrt(2/g2 - 1)",
                            "low gain, twin beam, thermal mode distribution")


def _invert_gain(forward, target: float, what: str) -> float:
    """Bisection in log B on the bracket ``B_BRACKET``; ``forward`` decreases in B."""
    lo, hi = np.log(B_BRACKET[0]), np.log(B_BRACKET[1])
    f_lo = forward(np.exp(lo)) - target
    f_hi = forward(np.exp(hi)) - target
    if f_hi > 0:
        raise DomainError(f"{what}={target} below high-gain asymptote ({forward(np.exp(hi)):.12g})")
    if f_lo < 0:
        raise DomainError(f"{what}={target} above the value reached at B={B_BRACKET[0]:g}")
    x = bisect(lambda t: forward(np.exp(t)) - target, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
               maxiter=400)
    return float(np.exp(x))


def estimate_B_from_g11(g11: float, lam=None) -> EstimationResult:
    if not g11 > 1.0:
        raise DomainError(f"g11={g11} must exceed 1")
    if lam is None:
        return EstimationResult("B", 1.0 / np.sqrt(g11), "B = 1/sqrt(g11)",
                                "low gain only (B << 1); mode-distribution independent")
    base = SqueezerSpectrum.from_lambda(lam, 1.0)

    def forward(B):
        return g11_twin(base.with_gain(B)).value

    B = _invert_gain(forward, g11, "g11")
    return EstimationResult("B", B, "bisection on g11_twin(B*lambda)", "exact for the supplied mode distribution")


def estimate_B_single_from_g2(g2: float, lam=None) -> EstimationResult:
    if not g2 > 1.0:
        raise DomainError(f"g2={g2} must exceed 1")
    if g2 > SINGLE_LOWGAIN_G2:
        return EstimationResult("B", 1.0 / np.sqrt(g2), "B = 1/sqrt(g2)", "single beam, low gain (g2 > 100)")
    if lam is None:
        raise DomainError(f"g2={g2} is outside the low-gain regime; a mode distribution is required")
    base = SqueezerSpectrum.from_lambda(lam, 1.0)

    def forward(B):
        return g2_single(base.with_gain(B)).value

    B = _invert_gain(forward, g2, "g2")
    return EstimationResult("B", B, "bisection on g2_single(B*lambda)", "single beam, supplied mode distribution")


def sweep_single_beam_curve(lam, B_range=SLOPE_WINDOW, n_points: int = SLOPE_POINTS) -> SlopeCurve:
    """(g2, g3) of a single-beam squeezer along log-spaced gains, plus the fitted slope."""
    b_min, b_max = B_range
    if not (0 < b_min < b_max <= 3.0):
        raise DomainError(f"invalid gain range {B_range}; need 0 < min < max <= 3")
    if n_points < 8:
        raise DomainError("sweep needs at least 8 points")
    base = SqueezerSpectrum.from_lambda(lam, 1.0)
    Bs = np.geomspace(b_min, b_max, n_points)
    pts = np.empty((n_points, 2))
    for j, B in enumerate(Bs):
        spec = base.with_gain(B)
        pts[j] = g2_single(spec).value, g3_single(spec).value
    slope, intercept = np.polyfit(pts[:, 0], pts[:, 1], 1)
    return SlopeCurve(Bs, pts, float(slope), float(intercept))


def _thermal_lambda(mu: float) -> np.ndarray:
    return SqueezerSpectrum.thermal(mu, 1.0).lam


@functools.lru_cache(maxsize=None)
def slope_table_mu() -> tuple[np.ndarray, np.ndarray]:
    """Calibration ``(mu, slope)`` for thermal distributions; slope strictly decreasing in mu."""
    slopes = np.array([sweep_single_beam_curve(_thermal_lambda(mu)).slope for mu in _MU_TABLE])
    if not np.all(np.diff(slopes) < 0):
        raise RuntimeError("slope table is not strictly monotone in mu")
    return _MU_TABLE.copy(), slopes


@functools.lru_cache(maxsize=None)
def slope_table_K() -> tuple[np.ndarray, np.ndarray]:
    """Calibration ``(K, slope)`` for uniform distributions over K modes."""
    slopes = np.array([sweep_single_beam_curve(np.ones(K)).slope for K in _K_TABLE])
    if not np.all(np.diff(slopes) < 0):
        raise RuntimeError("slope table is not strictly monotone in K")
    return _K_TABLE.astype(float), slopes


def _invert_table(slope: float, xs: np.ndarray, slopes: np.ndarray) -> float:
    lo, hi = slopes[-1], slopes[0]
    tol = 1e-9 * abs(hi)
    if not (lo - tol <= slope <= hi + tol):
        raise DomainError(f"slope {slope} outside calibrated range [{lo:.6g}, {hi:.6g}]")
    slope = min(max(slope, lo), hi)
    # table slopes decrease; interpolate on the reversed (increasing) axis
    return float(PchipInterpolator(slopes[::-1], xs[::-1])(slope))


def map_slope_to_mu(slope: float) -> EstimationResult:
    mus, slopes = slope_table_mu()
    mu = _invert_table(slope, mus, slopes)
    return EstimationResult("mu", mu, "slope table (thermal)",
                            f"single beam, slope window B in {SLOPE_WINDOW}")


def map_slope_to_K(slope: float) -> EstimationResult:
    Ks, slopes = slope_table_K()
    K = _invert_table(slope, Ks, slopes)
    return EstimationResult("K", K, "slope table (uniform)",
                            f"single beam, slope window B in {SLOPE_WINDOW}")


def estimate_from_measurement(measured: dict) -> list[EstimationResult]:
    """Estimate K, mu, B from a measurement record.

    Twin beam: ``g2`` gives K and mu, ``g11`` gives B (full inversion when
    ``lambda`` is supplied).  Single beam: paired lists ``g2``/``g3`` taken
    at different gains give the slope and hence K and mu; B follows from
    the first ``g2`` using ``lambda`` or, failing that, the thermal
    distribution with the estimated mu.
    """
    beam = measured.get("beam", "twin")
    lam = measured.get("lambda")
    out: list[EstimationResult] = []
    if beam == "twin":
        if "g2" in measured:
            out.append(estimate_K_from_g2(float(measured["g2"])))
            out.append(estimate_mu_from_g2(float(measured["g2"])))
        if "g11" in measured:
            out.append(estimate_B_from_g11(float(measured["g11"]), lam))
        return out
    if beam != "single":
        raise DomainError(f"unknown beam type {beam!r}")
    g2 = np.atleast_1d(np.asarray(measured.get("g2", []), dtype=float))
    g3 = np.atleast_1d(np.asarray(measured.get("g3", []), dtype=float))
    mu = None
    if g3.size:
        if g3.size != g2.size or g2.size < 2:
            raise DomainError("single-beam slope needs paired g2/g3 lists with at least 2 entries")
        slope = float(np.polyfit(g2, g3, 1)[0])
        out.append(map_slope_to_K(slope))
        mu_res = map_slope_to_mu(slope)
        out.append(mu_res)
        mu = mu_res.value
    if g2.size:
        if lam is None and mu is not None:
            lam = _thermal_lambda(mu)
        out.append(estimate_B_single_from_g2(float(g2[0]), lam))
    return out
