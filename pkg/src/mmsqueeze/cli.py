"""Command-line front end.

Every subcommand reads one JSON configuration document::

    mmsqueeze jsa --config run.json --out results/

Exit codes: 0 success, 2 configuration error, 3 domain error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import correlations, estimation, io, simulator
from .decomposition import SqueezerSpectrum, fit_thermal, schmidt_decompose, schmidt_number
from .errors import ConfigError, DomainError
from .spectral import (DispersionModel, FieldDispersion, FrequencyGrid, PumpEnvelope, auto_grid,
                       build_fwm_jsa, build_pdc_jsa)

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO = 0, 2, 3, 4

SPECTRAL_SOURCES = ("pdc", "fwm")
SPECTRUM_SOURCES = ("explicit", "lambda", "thermal", "uniform") + SPECTRAL_SOURCES

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_FIELD = {
    "type": "object",
    "properties": {"omega0": _num, "k0": _num, "k1": _num, "k2": _num},
    "required": ["omega0"],
    "additionalProperties": False,
}
_PUMP = {
    "type": "object",
    "properties": {"amplitude": _pos, "central_frequency": _num, "width": _pos},
    "required": ["central_frequency", "width"],
    "additionalProperties": False,
}
_GRID = {
    "type": "object",
    "properties": {
        "start_s": _num, "step_s": _pos, "start_i": _num, "step_i": _pos,
        "center_s": _num, "center_i": _num, "half_width_s": _pos, "half_width_i": _pos,
        "n_s": {"type": "integer", "minimum": 2}, "n_i": {"type": "integer", "minimum": 2},
        "n": {"type": "integer", "minimum": 2}, "n_sigma": _pos,
    },
    "additionalProperties": False,
}
_DETECTOR = {
    "type": "object",
    "properties": {
        "efficiency_signal": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "efficiency_idler": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "mode": {"enum": ["number_resolving", "hbt_click"]},
        "splitting": {"type": "number", "minimum": 0, "maximum": 1},
    },
    "additionalProperties": False,
}
_SWEEP = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["twin_mode_number", "twin_thermal", "twin_gain", "single_gain", "slope_tables"]},
        "B_min": _pos, "B_max": _pos, "n_points": {"type": "integer", "minimum": 2},
        "K_values": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "mu_values": {"type": "array", "items": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                      "minItems": 1},
    },
    "required": ["kind"],
    "additionalProperties": False,
}
_MEASURED = {
    "type": "object",
    "properties": {
        "beam": {"enum": ["twin", "single"]},
        "g2": {"oneOf": [_num, {"type": "array", "items": _num}]},
        "g3": {"oneOf": [_num, {"type": "array", "items": _num}]},
        "g11": _num,
        "lambda": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
    },
    "additionalProperties": False,
}

_SOURCE_PROPS = {
    "source": {"enum": list(SPECTRUM_SOURCES) + ["jsa_file"]},
    "pump": _PUMP, "pump2": _PUMP,
    "dispersion": {
        "type": "object",
        "properties": {"pump": _FIELD, "signal": _FIELD, "idler": _FIELD, "pump2": _FIELD},
        "required": ["pump", "signal", "idler"],
        "additionalProperties": False,
    },
    "grid": _GRID,
    "length": _num,
    "phasematching": {"enum": ["exact_sinc", "gaussian_approx"]},
    "coupling_scale": _num,
    "n_quad": {"type": "integer"},
    "r": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
    "lambda": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
    "B": {"type": "number", "minimum": 0},
    "mu": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
    "n_modes": {"type": "integer", "minimum": 1},
    "K": {"type": "integer", "minimum": 1},
    "jsa_file": {"type": "string"},
}
_SOURCE_RULES = [
    {"if": {"properties": {"source": {"const": "pdc"}}, "required": ["source"]},
     "then": {"required": ["pump", "dispersion", "length"]}},
    {"if": {"properties": {"source": {"const": "fwm"}}, "required": ["source"]},
     "then": {"required": ["pump", "dispersion", "length"]}},
    {"if": {"properties": {"source": {"const": "explicit"}}, "required": ["source"]},
     "then": {"required": ["r"]}},
    {"if": {"properties": {"source": {"const": "lambda"}}, "required": ["source"]},
     "then": {"required": ["lambda"]}},
    {"if": {"properties": {"source": {"const": "thermal"}}, "required": ["source"]},
     "then": {"required": ["mu"]}},
    {"if": {"properties": {"source": {"const": "uniform"}}, "required": ["source"]},
     "then": {"required": ["K"]}},
    {"if": {"properties": {"source": {"const": "jsa_file"}}, "required": ["source"]},
     "then": {"required": ["jsa_file"]}},
]
_COMMON = {"seed": {"type": "integer", "minimum": 0}, "out_dir": {"type": "string"}}


def _schema(extra: dict, required=("source",), rules=True) -> dict:
    schema = {
        "type": "object",
        "properties": {**_SOURCE_PROPS, **_COMMON, **extra},
        "required": list(required),
        "additionalProperties": False,
    }
    if rules:
        schema["allOf"] = _SOURCE_RULES
    return schema


SCHEMAS = {
    "jsa": _schema({}),
    "decompose": _schema({"n_modes_export": {"type": "integer", "minimum": 0}}),
    "correlations": _schema({
        "orders": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "beam": {"enum": ["twin", "single"]},
    }),
    "estimate": {
        "type": "object",
        "properties": {"measured": _MEASURED, **_COMMON},
        "required": ["measured"],
        "additionalProperties": False,
    },
    "simulate": _schema({
        "beam": {"enum": ["twin", "single"]},
        "detector": _DETECTOR,
        "n_pulses": {"type": "integer", "minimum": 1},
        "orders": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "workers": {"type": "integer", "minimum": 1},
        "write_records": {"type": "boolean"},
    }, required=("source", "n_pulses")),
    "sweep": _schema({"sweep": _SWEEP}, required=("sweep",)),
}


def validate_config(command: str, config: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMAS[command])
    error = jsonschema.exceptions.best_match(validator.iter_errors(config))
    if error is not None:
        where = "/".join(str(p) for p in error.absolute_path)
        prefix = f"at '{where}': " if where else ""
        raise ConfigError(f"invalid config: {prefix}{error.message}")


def _field(d: dict) -> FieldDispersion:
    return FieldDispersion(d["omega0"], d.get("k0", 0.0), d.get("k1", 0.0), d.get("k2", 0.0))


def _dispersion(cfg: dict) -> DispersionModel:
    d = cfg["dispersion"]
    return DispersionModel(_field(d["pump"]), _field(d["signal"]), _field(d["idler"]),
                           _field(d["pump2"]) if "pump2" in d else None)


def _pump(d: dict) -> PumpEnvelope:
    return PumpEnvelope(d.get("amplitude", 1.0), d["central_frequency"], d["width"])


def _grid(cfg: dict, pump: PumpEnvelope, dispersion: DispersionModel) -> FrequencyGrid:
    g = cfg.get("grid", {})
    explicit = {"start_s", "step_s", "n_s", "start_i", "step_i", "n_i"}
    centered = {"center_s", "center_i", "half_width_s", "half_width_i"}
    if explicit <= g.keys():
        return FrequencyGrid(g["start_s"], g["step_s"], g["n_s"], g["start_i"], g["step_i"], g["n_i"])
    if centered <= g.keys():
        n_s = g.get("n_s", g.get("n", 128))
        return FrequencyGrid.centered(g["center_s"], g["center_i"], g["half_width_s"], g["half_width_i"],
                                      n_s, g.get("n_i", n_s))
    if g.keys() & (explicit | centered):
        raise ConfigError("invalid config: 'grid' must give all of start_s/step_s/n_s/start_i/step_i/n_i "
                          "or all of center_s/center_i/half_width_s/half_width_i")
    return auto_grid(pump, dispersion, cfg["length"], n=g.get("n", 128), n_sigma=g.get("n_sigma", 8.0))


def build_jsa_from_config(cfg: dict):
    if cfg.get("source") not in SPECTRAL_SOURCES:
        raise ConfigError("jsa requires a spectral source (pdc or fwm)")
    if not cfg["length"] > 0:
        raise ConfigError("invalid config: 'length' must be positive")
    pump = _pump(cfg["pump"])
    dispersion = _dispersion(cfg)
    grid = _grid(cfg, pump, dispersion)
    scale = cfg.get("coupling_scale", 1.0)
    if cfg["source"] == "pdc":
        return build_pdc_jsa(pump, dispersion, cfg["length"], grid, cfg.get("phasematching", "exact_sinc"), scale)
    pump2 = _pump(cfg["pump2"]) if "pump2" in cfg else pump
    n_quad = cfg.get("n_quad", 256)
    if n_quad < 16:
        raise ConfigError("invalid config: 'n_quad' must be at least 16")
    return build_fwm_jsa(pump, pump2, dispersion, cfg["length"], grid, scale, n_quad,
                         cfg.get("phasematching", "exact_sinc"))


def spectrum_from_config(cfg: dict) -> SqueezerSpectrum:
    src = cfg["source"]
    B = cfg.get("B", 1.0)
    if src == "explicit":
        return SqueezerSpectrum.from_r(cfg["r"])
    if src == "lambda":
        return SqueezerSpectrum.from_lambda(cfg["lambda"], B)
    if src == "thermal":
        return SqueezerSpectrum.thermal(cfg["mu"], B, cfg.get("n_modes"))
    if src == "uniform":
        return SqueezerSpectrum.uniform(cfg["K"], B)
    if src == "jsa_file":
        jsa = _load_jsa(cfg["jsa_file"])
        return schmidt_decompose(jsa)[0]
    return schmidt_decompose(build_jsa_from_config(cfg))[0]


def _load_jsa(path):
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSA file {path}: {exc}") from exc
    return io.jsa_from_dict(obj)


def _thermal_summary(spectrum) -> dict:
    try:
        fit = fit_thermal(spectrum)
        return {"mu": fit.mu, "residual": fit.residual}
    except DomainError:
        return {"mu": None, "residual": None}


def cmd_jsa(cfg, out: Path, log):
    jsa = build_jsa_from_config(cfg)
    digest = cfg["_digest"]
    io.write_jsa_csv(out / "jsa.csv", jsa, digest)
    io.write_json(out / "jsa.json", {**io.jsa_to_dict(jsa), "config_digest": digest})
    g = jsa.grid
    log(f"grid {g.n_s} x {g.n_i}; omega_s [{g.omega_s[0]:.6e}, {g.omega_s[-1]:.6e}], "
        f"omega_i [{g.omega_i[0]:.6e}, {g.omega_i[-1]:.6e}]")
    log(f"frobenius norm {jsa.frobenius_norm():.12g}")


def cmd_decompose(cfg, out: Path, log):
    if cfg["source"] == "jsa_file":
        jsa = _load_jsa(cfg["jsa_file"])
    elif cfg["source"] in SPECTRAL_SOURCES:
        jsa = build_jsa_from_config(cfg)
    else:
        raise ConfigError("decompose requires a spectral source (pdc, fwm or jsa_file)")
    spectrum, modes = schmidt_decompose(jsa)
    digest = cfg["_digest"]
    K = schmidt_number(spectrum)
    result = {**spectrum.to_dict(), "K": K, **_thermal_summary(spectrum), "config_digest": digest}
    io.write_json(out / "spectrum.json", result)
    n_export = cfg.get("n_modes_export", 10)
    io.write_modes_csv(out / "modes_signal.csv", modes, "signal", n_export, digest)
    io.write_modes_csv(out / "modes_idler.csv", modes, "idler", n_export, digest)
    log(f"modes {spectrum.n_modes}; B {spectrum.B:.12g}; K {K:.12g}; mu {result['mu']}")


def cmd_correlations(cfg, out: Path, log):
    spectrum = spectrum_from_config(cfg)
    beam = cfg.get("beam", "twin")
    orders = cfg.get("orders", ["g2", "g11"] if beam == "twin" else ["g2", "g3"])
    values = correlations.evaluate_batch([(o, spectrum, beam) for o in orders])
    io.write_json(out / "correlations.json", {
        "beam": beam, "spectrum": spectrum.to_dict(), "mean_photon": correlations.mean_photon(spectrum).value,
        "values": values, "config_digest": cfg["_digest"],
    })
    for v in values:
        log(f"{v['order']} = {v['value']:.12g}")


def cmd_estimate(cfg, out: Path, log):
    results = estimation.estimate_from_measurement(cfg["measured"])
    io.write_json(out / "estimates.json", {"results": [r.to_dict() for r in results],
                                           "config_digest": cfg["_digest"]})
    for r in results:
        log(f"{r.quantity} = {r.value:.12g} ({r.method})")


def cmd_simulate(cfg, out: Path, log):
    spectrum = spectrum_from_config(cfg)
    det_cfg = dict(cfg.get("detector", {}))
    splitting = det_cfg.pop("splitting", 0.5)
    detector = simulator.DetectorModel(**det_cfg)
    beam = cfg.get("beam", "twin")
    seed = cfg.get("seed", 0)
    workers = cfg.get("workers", 1)
    sample = simulator.sample_twin_beam if beam == "twin" else simulator.sample_single_beam
    ensemble = sample(spectrum, detector, cfg["n_pulses"], seed, workers=workers)
    orders = cfg.get("orders", ["g2", "g11"] if beam == "twin" else ["g2", "g3"])
    estimates = simulator.estimate_correlations(ensemble, orders)
    if detector.mode == "hbt_click":
        estimates.append(simulator.hbt_click_estimate_g2(ensemble, splitting))
    summary = io.ensemble_summary(ensemble, estimates)
    summary["config_digest"] = cfg["_digest"]
    io.write_json(out / "summary.json", summary)
    if cfg.get("write_records", False):
        io.write_ensemble_csv(out / "ensemble.csv", ensemble, cfg["_digest"])
    for e in estimates:
        log(f"{e.order} = {e.value:.6g} +- {e.stderr:.2g}")


def _sweep_B(sw):
    b_min, b_max = sw.get("B_min", 0.01), sw.get("B_max", 3.0)
    if not b_min < b_max:
        raise DomainError(f"invalid gain range ({b_min}, {b_max})")
    return np.geomspace(b_min, b_max, sw.get("n_points", 50))


def cmd_sweep(cfg, out: Path, log):
    sw = cfg["sweep"]
    kind = sw["kind"]
    digest = cfg["_digest"]
    path = out / "sweep.csv"
    if kind == "twin_mode_number":
        Ks = sw.get("K_values", list(range(1, 21)))
        rows = []
        for K in Ks:
            g2 = correlations.g2_twin_lowgain(SqueezerSpectrum.uniform(K, 1.0)).value
            rows.append((K, g2, estimation.estimate_K_from_g2(g2).value))
        io.write_csv(path, ["K", "g2", "K_from_g2"], rows, digest)
    elif kind == "twin_thermal":
        mus = sw.get("mu_values", [round(0.05 * j, 2) for j in range(19)])
        rows = []
        for mu in mus:
            g2 = correlations.g2_twin_lowgain(SqueezerSpectrum.thermal(mu, 1.0)).value
            rows.append((mu, g2, estimation.estimate_mu_from_g2(g2).value))
        io.write_csv(path, ["mu", "g2", "mu_from_g2"], rows, digest)
    elif kind == "twin_gain":
        base = spectrum_from_config(cfg) if "source" in cfg else SqueezerSpectrum.from_r([1.0])
        rows = []
        for B in _sweep_B(sw):
            spec = base.with_gain(B)
            rows.append((B, correlations.g2_twin(spec).value, correlations.g11_twin(spec).value,
                         correlations.mean_photon(spec).value))
        io.write_csv(path, ["B", "g2", "g11", "mean_photon"], rows, digest)
    elif kind == "single_gain":
        base = spectrum_from_config(cfg) if "source" in cfg else SqueezerSpectrum.from_r([1.0])
        rows = []
        for B in _sweep_B(sw):
            spec = base.with_gain(B)
            rows.append((B, correlations.g2_single(spec).value, correlations.g3_single(spec).value))
        io.write_csv(path, ["B", "g2", "g3"], rows, digest)
        curve = estimation.sweep_single_beam_curve(base.lam)
        io.write_json(out / "slope.json", {"slope": curve.slope, "intercept": curve.intercept,
                                           "B_window": list(estimation.SLOPE_WINDOW), "config_digest": digest})
    elif kind == "slope_tables":
        mus, s_mu = estimation.slope_table_mu()
        Ks, s_K = estimation.slope_table_K()
        io.write_csv(path, ["mu", "slope"], zip(mus, s_mu), digest)
        io.write_csv(out / "sweep_K.csv", ["K", "slope"], zip(Ks.astype(int), s_K), digest)
    log(f"sweep {kind} written to {path}")


COMMANDS = {
    "jsa": cmd_jsa,
    "decompose": cmd_decompose,
    "correlations": cmd_correlations,
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmsqueeze", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
        p.add_argument("--out", type=Path, default=None, help="output directory (default: config out_dir or .)")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--workers", type=int, default=None, help="sampling threads (simulate only)")
        p.add_argument("--quiet", action="store_true")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    log = (lambda msg: None) if args.quiet else print
    try:
        try:
            cfg = json.loads(args.config.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.workers is not None:
            if args.command != "simulate":
                raise ConfigError("--workers applies to simulate only")
            cfg["workers"] = args.workers
        validate_config(args.command, cfg)
        # worker count must not change outputs, so it is left out of the digest
        digest_cfg = {k: v for k, v in cfg.items() if k != "workers"}
        cfg = copy.deepcopy(cfg)
        cfg["_digest"] = io.config_digest(digest_cfg)
        out = args.out if args.out is not None else Path(cfg.get("out_dir", "."))
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out, log)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
