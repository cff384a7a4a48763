"""Broadband multimode correlation functions.

Closed forms for twin-beam and single-beam squeezers in terms of the
per-mode occupations ``n_k = sinh(r_k)**2``, and an exact engine for
general orders that combines per-mode factorial moments of independent
modes.

Twin beams: each mode pair is a two-mode squeezed vacuum, so the signal and
idler photon numbers of mode ``k`` are equal and geometric with mean
``n_k``.  Its factorial moments are ``E[(n)_j] = j! n_k**j``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .decomposition import SqueezerSpectrum
from .errors import DomainError

MAX_ORDER = 8
MAX_CROSS_ORDER = 6


@dataclass(frozen=True)
class CorrelationValue:
    order: str
    value: float

    def to_dict(self) -> dict:
        return {"order": self.order, "value": self.value}


@dataclass(frozen=True)
class MeanPhoton:
    value: float


def occupations(spectrum: SqueezerSpectrum) -> np.ndarray:
    """Mean photon number per mode, ``sinh(r_k)**2``."""
    return np.sinh(spectrum.r) ** 2


def _moments(spectrum: SqueezerSpectrum):
    n = occupations(spectrum)
    total = float(np.sum(n))
    if not total > 0:
        raise DomainError("vacuum has undefined correlation functions (all r_k = 0)")
    return n, total


def mean_photon(spectrum: SqueezerSpectrum) -> MeanPhoton:
    return MeanPhoton(float(np.sum(occupations(spectrum))))


def g2_twin(spectrum: SqueezerSpectrum) -> CorrelationValue:
    n, S = _moments(spectrum)
    return CorrelationValue("g2", 1.0 + float(np.sum(n * n)) / S ** 2)


def g2_twin_lowgain(spectrum: SqueezerSpectrum) -> CorrelationValue:
    return CorrelationValue("g2", 1.0 + float(np.sum(spectrum.lam ** 4)))


def g11_twin(spectrum: SqueezerSpectrum) -> CorrelationValue:
    n, S = _moments(spectrum)
    return CorrelationValue("g11", 1.0 + 1.0 / S + float(np.sum(n * n)) / S ** 2)


def g2_single(spectrum: SqueezerSpectrum) -> CorrelationValue:
    n, S = _moments(spectrum)
    return CorrelationValue("g2", 1.0 + 2.0 * float(np.sum(n * n)) / S ** 2 + 1.0 / S)


def g3_single(spectrum: SqueezerSpectrum) -> CorrelationValue:
    n, S = _moments(spectrum)
    s2 = float(np.sum(n ** 2))
    s3 = float(np.sum(n ** 3))
    value = 1.0 + 6.0 * s2 / S ** 2 + 8.0 * s3 / S ** 3 + 3.0 / S + 6.0 * s2 / S ** 3
    return CorrelationValue("g3", value)


def thermal_factorial_moments(nbar: float, order: int) -> np.ndarray:
    """``[E[(n)_0], ..., E[(n)_order]]`` for a geometric law with mean ``nbar``."""
    j = np.arange(order + 1)
    return np.array([math.factorial(int(m)) for m in j], dtype=float) * nbar ** j


def twin_joint_factorial_moments(nbar: float, n: int, m: int) -> np.ndarray:
    """``E[(N_s)_a (N_i)_b]`` for one two-mode squeezed vacuum, ``a <= n``, ``b <= m``.

    With ``N_s == N_i == N`` the product of falling factorials expands as
    ``(N)_a (N)_b = sum_k C(a,k) C(b,k) k! (N)_{a+b-k}``.
    """
    out = np.zeros((n + 1, m + 1))
    single = thermal_factorial_moments(nbar, n + m)
    for a in range(n + 1):
        for b in range(m + 1):
            out[a, b] = sum(math.comb(a, k) * math.comb(b, k) * math.factorial(k) * single[a + b - k]
                            for k in range(min(a, b) + 1))
    return out


def combine_factorial_moments(per_mode: list[np.ndarray]) -> np.ndarray:
    """Factorial moments of a sum of independent counts.

    Uses ``(X + Y)_j = sum_i C(j, i) (X)_i (Y)_{j-i}``, the multinomial
    expansion of falling factorials, applied mode by mode.
    """
    order = len(per_mode[0]) - 1
    binom = np.array([[math.comb(j, i) for i in range(order + 1)] for j in range(order + 1)], dtype=float)
    total = np.zeros(order + 1)
    total[0] = 1.0
    for mom in per_mode:
        new = np.empty_like(total)
        for j in range(order + 1):
            new[j] = np.dot(binom[j, : j + 1], total[: j + 1] * mom[j::-1])
        total = new
    return total


def combine_joint_factorial_moments(per_mode: list[np.ndarray]) -> np.ndarray:
    """Two-variable version of :func:`combine_factorial_moments`."""
    n, m = per_mode[0].shape[0] - 1, per_mode[0].shape[1] - 1
    total = np.zeros((n + 1, m + 1))
    total[0, 0] = 1.0
    for mom in per_mode:
        new = np.zeros_like(total)
        for a in range(n + 1):
            for b in range(m + 1):
                acc = 0.0
                for i in range(a + 1):
                    ca = math.comb(a, i)
                    for j in range(b + 1):
                        acc += ca * math.comb(b, j) * total[i, j] * mom[a - i, b - j]
                new[a, b] = acc
        total = new
    return total


def gn_twin(spectrum: SqueezerSpectrum, n: int) -> CorrelationValue:
    """``<:N^n:> / <N>^n`` for one arm of a multimode twin beam, ``1 <= n <= 8``."""
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= MAX_ORDER):
        raise DomainError(f"order unsupported: n={n} (allowed 1..{MAX_ORDER})")
    occ, S = _moments(spectrum)
    occ = occ[occ > 0]
    total = combine_factorial_moments([thermal_factorial_moments(x, n) for x in occ])
    return CorrelationValue(f"g{n}", float(total[n] / S ** n))


def gnm_twin_cross(spectrum: SqueezerSpectrum, n: int, m: int) -> CorrelationValue:
    """Signal/idler cross-correlation ``g^(n,m)``, ``1 <= n + m <= 6``."""
    if n < 0 or m < 0 or not 1 <= n + m <= MAX_CROSS_ORDER:
        raise DomainError(f"order unsupported: (n, m)=({n}, {m}); need 1 <= n+m <= {MAX_CROSS_ORDER}")
    occ, S = _moments(spectrum)
    occ = occ[occ > 0]
    total = combine_joint_factorial_moments([twin_joint_factorial_moments(x, n, m) for x in occ])
    return CorrelationValue(f"g{n}{m}", float(total[n, m] / S ** (n + m)))


_ORDER_RE = re.compile(r"^g(\d)(?:,?(\d))?$")


def evaluate(order: str, spectrum: SqueezerSpectrum, beam: str = "twin") -> CorrelationValue:
    """Evaluate one labelled correlation function.

    Labels: ``gN`` for an intra-beam order, ``gNM`` (or ``gN,M``) for a twin
    cross-correlation.  Single beams support ``g2`` and ``g3``.
    """
    match = _ORDER_RE.match(order)
    if not match:
        raise DomainError(f"unrecognised correlation label {order!r}")
    n = int(match.group(1))
    m = match.group(2)
    if beam == "single":
        if m is None and n == 2:
            return g2_single(spectrum)
        if m is None and n == 3:
            return g3_single(spectrum)
        if m is None and n == 1:
            _moments(spectrum)
            return CorrelationValue("g1", 1.0)
        raise DomainError(f"order {order!r} not available for single-beam squeezers")
    if beam != "twin":
        raise DomainError(f"unknown beam type {beam!r}")
    if m is None:
        if n == 2:
            return g2_twin(spectrum)
        return gn_twin(spectrum, n)
    m = int(m)
    if (n, m) == (1, 1):
        return g11_twin(spectrum)
    value = gnm_twin_cross(spectrum, n, m)
    return CorrelationValue(order, value.value)


def evaluate_batch(requests) -> list[dict]:
    """Batch API: ``[(order, spectrum[, beam]), ...]`` -> JSON-ready list."""
    out = []
    for req in requests:
        order, spectrum, *rest = req
        beam = rest[0] if rest else "twin"
        out.append(evaluate(order, spectrum, beam).to_dict())
    return out
