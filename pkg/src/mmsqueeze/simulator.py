"""Monte-Carlo photon counting for multimode squeezers with detector loss.

Sampling is organised in fixed chunks of ``RNG_CHUNK`` pulses.  Chunk ``c``
draws from a Philox generator keyed by ``SeedSequence(seed, spawn_key=(c,))``,
so an ensemble depends only on (spectrum, detector, seed, n_pulses) and
never on how chunks are scheduled across workers.
"""
from __future__ import annotations

import hashlib
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._kernels import block_factorial_sums
from .correlations import occupations
from .decomposition import SqueezerSpectrum
from .errors import DomainError, NoCountsError

RNG_CHUNK = 1 << 16
JACKKNIFE_BLOCKS = 20
MAX_SINGLE_R = 5.0
TAIL_MASS = 1e-12
_HBT_STREAM = 0x4842  # separates beamsplitter randomness from pulse sampling


@dataclass(frozen=True)
class DetectorModel:
    efficiency_signal: float = 1.0
    efficiency_idler: float | None = None
    mode: str = "number_resolving"

    def __post_init__(self):
        if self.efficiency_idler is None:
            object.__setattr__(self, "efficiency_idler", self.efficiency_signal)
        for eta in (self.efficiency_signal, self.efficiency_idler):
            if not 0 < eta <= 1:
                raise ValueError(f"detector efficiency {eta} outside (0, 1]")
        if self.mode not in ("number_resolving", "hbt_click"):
            raise ValueError(f"unknown detector mode {self.mode!r}")


@dataclass(frozen=True, eq=False)
class PulseEnsemble:
    n_pulses: int
    signal: np.ndarray
    idler: np.ndarray
    seed: int
    spectrum_hash: str
    beam: str = "twin"
    detector: DetectorModel = field(default_factory=DetectorModel)

    def __post_init__(self):
        if self.signal.shape != (self.n_pulses,) or self.idler.shape != (self.n_pulses,):
            raise ValueError("record count does not match n_pulses")

    @property
    def records(self) -> np.ndarray:
        return np.column_stack([self.signal, self.idler])


@dataclass(frozen=True)
class EstimatedCorrelation:
    order: str
    value: float
    stderr: float

    def to_dict(self) -> dict:
        return {"order": self.order, "value": self.value, "stderr": self.stderr}


def spectrum_digest(spectrum: SqueezerSpectrum) -> str:
    return hashlib.sha256(np.ascontiguousarray(spectrum.r, dtype="<f8").tobytes()).hexdigest()


def _chunk_rng(seed: int, chunk: int, stream: int | None = None) -> np.random.Generator:
    key = (chunk,) if stream is None else (stream, chunk)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def _run_chunks(n_pulses: int, fill, workers: int):
    n_chunks = -(-n_pulses // RNG_CHUNK)
    bounds = [(c, c * RNG_CHUNK, min((c + 1) * RNG_CHUNK, n_pulses)) for c in range(n_chunks)]
    if workers <= 1 or n_chunks == 1:
        for b in bounds:
            fill(*b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: fill(*b), bounds))


def _thin(rng, counts, eta):
    return rng.binomial(counts, eta).astype(np.int64)


def _twin_columns(rng, occ, size):
    for nbar in occ:
        yield rng.geometric(1.0 / (1.0 + nbar), size) - 1 if nbar > 0 else np.zeros(size, dtype=np.int64)


def draw_twin_modes(rng: np.random.Generator, occ: np.ndarray, size: int) -> np.ndarray:
    """Pre-loss photon numbers per mode, shape ``(size, n_modes)``; geometric with mean ``occ``."""
    return np.column_stack(list(_twin_columns(rng, occ, size))).astype(np.int64)


def squeezed_vacuum_cdf(r: float) -> np.ndarray:
    """Cumulative law of ``m`` where ``2m`` photons are present in a squeezed vacuum.

    ``P(2m) = (2m)! / (2^m m!)^2 * tanh(r)^(2m) / cosh(r)``, truncated where the
    cumulative mass reaches ``1 - 1e-12``.
    """
    if r > MAX_SINGLE_R:
        raise DomainError(f"tail truncation unsafe for r={r} > {MAX_SINGLE_R}")
    t2 = np.tanh(r) ** 2
    p0 = 1.0 / np.cosh(r)
    if t2 == 0:
        return np.array([1.0])
    m_max = int(np.ceil(np.log(TAIL_MASS * 1e-3) / np.log(t2))) + 16
    m = np.arange(m_max)
    ratio = (2 * m + 1) / (2 * m + 2) * t2  # P(m+1)/P(m)
    probs = p0 * np.concatenate([[1.0], np.cumprod(ratio[:-1])])
    cdf = np.cumsum(probs)
    stop = int(np.searchsorted(cdf, 1.0 - TAIL_MASS)) + 1
    return cdf[:stop]


def _single_columns(rng, cdfs, size):
    for cdf in cdfs:
        if cdf.size == 1:
            yield np.zeros(size, dtype=np.int64)
            continue
        u = rng.random(size)
        yield 2 * np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


def draw_single_modes(rng: np.random.Generator, cdfs: list[np.ndarray], size: int) -> np.ndarray:
    """Pre-loss photon numbers per mode by inverse-CDF sampling; always even."""
    return np.column_stack(list(_single_columns(rng, cdfs, size))).astype(np.int64)


def _accumulate(columns, size):
    total = np.zeros(size, dtype=np.int64)
    for col in columns:
        total += col
    return total


def _check_pulses(n_pulses):
    if int(n_pulses) < 1:
        raise ValueError("n_pulses must be at least 1")


def sample_twin_beam(spectrum: SqueezerSpectrum, detector: DetectorModel, n_pulses: int, seed: int,
                     workers: int = 1) -> PulseEnsemble:
    """Photon counts of a multimode twin beam after independent binomial loss per arm."""
    _check_pulses(n_pulses)
    occ = occupations(spectrum)
    occ = occ[occ > 0]
    signal = np.zeros(n_pulses, dtype=np.int64)
    idler = np.zeros(n_pulses, dtype=np.int64)

    def fill(chunk, start, stop):
        rng = _chunk_rng(seed, chunk)
        total = _accumulate(_twin_columns(rng, occ, stop - start), stop - start)
        signal[start:stop] = _thin(rng, total, detector.efficiency_signal)
        idler[start:stop] = _thin(rng, total, detector.efficiency_idler)

    _run_chunks(n_pulses, fill, workers)
    return PulseEnsemble(n_pulses, signal, idler, int(seed), spectrum_digest(spectrum), "twin", detector)


def sample_single_beam(spectrum: SqueezerSpectrum, detector: DetectorModel, n_pulses: int, seed: int,
                       workers: int = 1) -> PulseEnsemble:
    """Photon counts of a multimode single-beam squeezer; the idler column is zero."""
    _check_pulses(n_pulses)
    if np.any(spectrum.r > MAX_SINGLE_R):
        raise DomainError(f"tail truncation unsafe: r_max={spectrum.r.max():.3g} > {MAX_SINGLE_R}")
    cdfs = [squeezed_vacuum_cdf(r) for r in spectrum.r if r > 0]
    signal = np.zeros(n_pulses, dtype=np.int64)
    idler = np.zeros(n_pulses, dtype=np.int64)

    def fill(chunk, start, stop):
        rng = _chunk_rng(seed, chunk)
        total = _accumulate(_single_columns(rng, cdfs, stop - start), stop - start)
        signal[start:stop] = _thin(rng, total, detector.efficiency_signal)

    _run_chunks(n_pulses, fill, workers)
    return PulseEnsemble(n_pulses, signal, idler, int(seed), spectrum_digest(spectrum), "single", detector)


_LABEL = re.compile(r"^g(\d)(?:,?(\d))?$")


def _parse_orders(orders):
    parsed = []
    for label in orders:
        m = _LABEL.match(label)
        if not m:
            raise DomainError(f"unrecognised correlation label {label!r}")
        n = int(m.group(1))
        parsed.append((label, n, None if m.group(2) is None else int(m.group(2))))
    return parsed


def _jackknife(blocks: np.ndarray, n_per_block: np.ndarray, estimator) -> tuple[float, float]:
    """Full-sample value and delete-one-block jackknife standard error.

    ``blocks`` holds additive per-block sums; ``estimator(sums, n)`` turns a
    sum and a record count into an estimate.
    """
    total = blocks.sum(axis=0)
    n_total = n_per_block.sum()
    value = estimator(total, n_total)
    nb = blocks.shape[0]
    loo = np.array([estimator(total - blocks[b], n_total - n_per_block[b]) for b in range(nb)])
    err = float(np.sqrt((nb - 1) / nb * np.sum((loo - loo.mean()) ** 2)))
    return float(value), err


def _block_sizes(n, nb):
    edges = np.arange(nb + 1) * n // nb
    return np.diff(edges).astype(float)


def estimate_correlations(ensemble: PulseEnsemble, orders, n_blocks: int = JACKKNIFE_BLOCKS
                          ) -> list[EstimatedCorrelation]:
    """Factorial-moment estimates of ``gN`` (signal arm) and ``gNM`` (signal/idler).

    ``gN = mean[(N)_n] / mean[N]^n`` and ``gNM = mean[(N_s)_n (N_i)_m] /
    (mean[N_s]^n mean[N_i]^m)``; errors by a 20-block jackknife.
    """
    if ensemble.n_pulses < 100:
        raise ValueError("need at least 100 pulses to estimate correlations")
    parsed = _parse_orders(orders)
    order = max(max(n, m or 0) for _, n, m in parsed)
    sums = block_factorial_sums(ensemble.signal, ensemble.idler, n_blocks, order)
    sizes = _block_sizes(ensemble.n_pulses, n_blocks)

    results = []
    for label, n, m in parsed:
        a, c = (n, 0) if m is None else (n, m)
        if sums[:, 1, 0].sum() == 0 or (c > 0 and sums[:, 0, 1].sum() == 0):
            raise NoCountsError(f"no counts: cannot normalise {label}")

        def est(s, N, a=a, c=c):
            mean_s = s[1, 0] / N
            mean_i = s[0, 1] / N
            if mean_s == 0 or (c > 0 and mean_i == 0):
                return np.nan
            return (s[a, c] / N) / (mean_s ** a * mean_i ** c)

        value, err = _jackknife(sums, sizes, est)
        results.append(EstimatedCorrelation(label, value, err))
    return results


def hbt_click_estimate_g2(ensemble: PulseEnsemble, splitting: float = 0.5,
                          n_blocks: int = JACKKNIFE_BLOCKS) -> EstimatedCorrelation:
    """Click-detector g2 behind a beamsplitter on the signal arm.

    Each photon goes to arm 2 with probability ``splitting``; the estimate
    ``P(click1 & click2) / (P(click1) P(click2))`` equals g2 only in the
    low-flux limit and is biased low once multi-photon events saturate
    the detectors.
    """
    if not 0 <= splitting <= 1:
        raise ValueError("splitting must lie in [0, 1]")
    if ensemble.n_pulses < 100:
        raise ValueError("need at least 100 pulses to estimate correlations")
    n = ensemble.n_pulses
    click1 = np.empty(n, dtype=np.int64)
    click2 = np.empty(n, dtype=np.int64)

    def fill(chunk, start, stop):
        rng = _chunk_rng(ensemble.seed, chunk, _HBT_STREAM)
        counts = ensemble.signal[start:stop]
        arm2 = rng.binomial(counts, splitting)
        click1[start:stop] = (counts - arm2) > 0
        click2[start:stop] = arm2 > 0

    _run_chunks(n, fill, 1)
    sums = block_factorial_sums(click1, click2, n_blocks, 1)
    if sums[:, 1, 0].sum() == 0:
        raise NoCountsError("no counts in arm 1")
    if sums[:, 0, 1].sum() == 0:
        raise NoCountsError("no counts in arm 2")

    def est(s, N):
        p1, p2 = s[1, 0] / N, s[0, 1] / N
        if p1 == 0 or p2 == 0:
            return np.nan
        return (s[1, 1] / N) / (p1 * p2)

    value, err = _jackknife(sums, _block_sizes(n, n_blocks), est)
    return EstimatedCorrelation("g2_click", value, err)
