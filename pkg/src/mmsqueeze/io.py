"""CSV/JSON serialisation.

CSV files start with a ``# config_digest: ...`` comment when a digest is
given, followed by a header row.  Floats are written with ``repr`` so the
output round-trips exactly and never depends on locale.
"""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .decomposition import SchmidtModes
from .simulator import EstimatedCorrelation, PulseEnsemble
from .spectral import FrequencyGrid, JointSpectralAmplitude


def config_digest(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows, digest: str | None = None) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if digest is not None:
            fh.write(f"# config_digest: {digest}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    data = np.array([[float(x) for x in row] for row in reader])
    return header, data


def write_json(path, obj) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def jsa_rows(jsa: JointSpectralAmplitude):
    ws, wi = jsa.grid.omega_s, jsa.grid.omega_i
    for a in range(jsa.grid.n_s):
        for b in range(jsa.grid.n_i):
            v = jsa.values[a, b]
            yield ws[a], wi[b], v.real, v.imag


def write_jsa_csv(path, jsa: JointSpectralAmplitude, digest: str | None = None) -> None:
    write_csv(path, ["omega_s", "omega_i", "re", "im"], jsa_rows(jsa), digest)


def jsa_to_dict(jsa: JointSpectralAmplitude) -> dict:
    return {
        "grid": jsa.grid.to_dict(),
        "coupling_scale": jsa.coupling_scale,
        "values": {"re": jsa.values.real.tolist(), "im": jsa.values.imag.tolist()},
    }


def jsa_from_dict(obj: dict) -> JointSpectralAmplitude:
    grid = FrequencyGrid(**obj["grid"])
    values = np.asarray(obj["values"]["re"], dtype=float) + 1j * np.asarray(obj["values"]["im"], dtype=float)
    return JointSpectralAmplitude(grid, values, float(obj.get("coupling_scale", 1.0)))


def write_modes_csv(path, modes: SchmidtModes, arm: str, n_export: int, digest: str | None = None) -> None:
    if arm == "signal":
        funcs, omega = modes.psi, modes.grid.omega_s
    else:
        funcs, omega = modes.phi, modes.grid.omega_i
    n_export = min(n_export, funcs.shape[0])

    def rows():
        for k in range(n_export):
            for w, v in zip(omega, funcs[k]):
                yield k, w, v.real, v.imag

    write_csv(path, ["k", "omega", "re", "im"], rows(), digest)


def write_ensemble_csv(path, ensemble: PulseEnsemble, digest: str | None = None) -> None:
    rows = ((j, int(s), int(i)) for j, (s, i) in enumerate(zip(ensemble.signal, ensemble.idler)))
    write_csv(path, ["pulse_index", "n_signal", "n_idler"], rows, digest)


def ensemble_summary(ensemble: PulseEnsemble, estimates: list[EstimatedCorrelation]) -> dict:
    return {
        "orders": [e.order for e in estimates],
        "values": [e.value for e in estimates],
        "stderr": [e.stderr for e in estimates],
        "n_pulses": ensemble.n_pulses,
        "seed": ensemble.seed,
        "beam": ensemble.beam,
        "spectrum_hash": ensemble.spectrum_hash,
    }
