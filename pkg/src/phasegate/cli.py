"""``phasegate`` command-line interface.

    phasegate <synth|trace|filter|purity|calibrate|validate>
              --config PATH --out DIR [--seed N] [--threads N]

Exit codes: 0 success, 2 config error, 3 precondition failure,
4 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .entangler import DEFAULT_TARGET, CalibrationError, calibrate_rabi, entangling_phase
from .model import (Config, ConfigError, SpectrumNoise, initial_state_from_z_label,
                    load_config_file)
from .noisekit import (PreconditionError, filter_curves, low_frequency_slope, purity_loss_mc,
                       purity_loss_spectral)
from .phasespace import closure_residual, trajectory
from .seqsynth import reduce_commensurate, synth_recipe

log = logging.getLogger("phasegate")

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_VALIDATION = 0, 2, 3, 4

# config sections each command reads; others trigger a warning
RELEVANT = {
    "synth": {"sequence", "recipe"},
    "trace": {"sequence", "recipe", "trace"},
    "filter": {"sequence", "recipe", "state", "filter"},
    "purity": {"sequence", "recipe", "state", "noise", "purity"},
    "calibrate": {"sequence", "recipe", "calibrate"},
    "validate": set(),
}


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        self.code = code
        super().__init__(message)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _sequence(cfg: Config):
    if cfg.sequence is not None:
        return cfg.sequence
    if cfg.recipe is not None:
        return synth_recipe(cfg.recipe, cfg.modes)
    raise CommandError("config has neither 'sequence' nor 'recipe'", EXIT_CONFIG)


def _warn_irrelevant(cmd: str, cfg: Config) -> None:
    present = {"sequence": cfg.sequence, "recipe": cfg.recipe, "noise": cfg.noise,
               "state": cfg.state}
    present = {k for k, v in present.items() if v is not None} | set(cfg.analysis)
    for section in sorted(present - RELEVANT[cmd]):
        log.warning("%s: ignoring config section '%s'", cmd, section)


def _closure_records(seq, modes):
    out = []
    for m in modes:
        a = closure_residual(seq, m.detuning)
        out.append({"mode": m.index, "residual_re_s": a.real, "residual_im_s": a.imag,
                    "residual_abs_s": abs(a), "normalized": abs(m.detuning) * abs(a)})
    return out


def _pair(section: dict) -> tuple[int, int]:
    pair = tuple(int(q) for q in section.get("pair", (1, 2)))
    if len(pair) != 2:
        raise CommandError("pair must name two qubits", EXIT_CONFIG)
    return pair  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# commands; each returns (exit code, list of written file names)
# ---------------------------------------------------------------------------

def cmd_synth(cfg: Config, out: Path, args) -> tuple[int, list[str]]:
    seq = _sequence(cfg)
    rows = [(ell, phi, phi / math.pi) for ell, phi in enumerate(seq.phases)]
    _write_csv(out / "phases.csv", ["segment_index [1]", "phase [rad]", "phase/pi [1]"], rows)
    closed, needs = reduce_commensurate(cfg.modes, seq.step)
    summary = {
        "units": {"time": "s", "phase": "rad"},
        "step_s": seq.step,
        "step_us": seq.step * 1e6,
        "n_segments": seq.n_segments,
        "n_phase_shifts": seq.n_segments - 1,
        "total_duration_s": seq.duration,
        "total_duration_us": seq.duration * 1e6,
        "recipe": list(cfg.recipe.mode_indices) if cfg.recipe is not None else None,
        "phases_rad": list(seq.phases),
        "phases_over_pi": [p / math.pi for p in seq.phases],
        "commensuration": {"auto_closed": closed, "needs_R": needs},
        "closure": _closure_records(seq, cfg.modes),
    }
    _write_json(out / "phases.json", summary)
    print(f"{seq.n_segments} segments, step {seq.step * 1e6:.4f} us, "
          f"total {seq.duration * 1e6:.2f} us")
    for ell, phi, frac in rows:
        print(f"  l={ell:3d}  phi = {phi: .6f} rad = {frac:.4f} pi")
    return EXIT_OK, ["phases.csv", "phases.json"]


def cmd_trace(cfg: Config, out: Path, args) -> tuple[int, list[str]]:
    seq = _sequence(cfg)
    sps = int(cfg.analysis.get("trace", {}).get("samples_per_segment", 64))
    files, endpoints = [], []
    for m in cfg.modes:
        tr = trajectory(seq, m.detuning, sps, m.index)
        name = f"trace_mode{m.index}.csv"
        scale = abs(m.detuning)
        rows = zip(tr.times, tr.values.real, tr.values.imag,
                   scale * tr.values.real, scale * tr.values.imag)
        _write_csv(out / name, ["t [s]", "Re alpha [s]", "Im alpha [s]",
                                "|delta| Re alpha [1]", "|delta| Im alpha [1]"], rows)
        files.append(name)
        endpoints.append({"mode": m.index, "endpoint_re_s": tr.endpoint.real,
                          "endpoint_im_s": tr.endpoint.imag,
                          "normalized_abs": scale * abs(tr.endpoint)})
    _write_json(out / "trace.json", {"units": {"time": "s", "alpha": "s"},
                                     "samples_per_segment": sps, "endpoints": endpoints})
    for e in endpoints:
        print(f"  mode {e['mode']}: |delta alpha(T)| = {e['normalized_abs']:.3e}")
    return EXIT_OK, files + ["trace.json"]


def cmd_filter(cfg: Config, out: Path, args) -> tuple[int, list[str]]:
    seq = _sequence(cfg)
    opts = cfg.analysis.get("filter", {})
    scale = opts.get("scale", "log")
    points = int(opts.get("points", 401))
    khz = 2 * math.pi * 1e3
    if scale == "log":
        lo = float(opts["omega_min_khz"]) * khz if "omega_min_khz" in opts else 1e-4 / seq.step
        hi = float(opts["omega_max_khz"]) * khz if "omega_max_khz" in opts else 1e2 / seq.step
        if not 0 < lo < hi:
            raise CommandError("log grid needs 0 < omega_min < omega_max", EXIT_CONFIG)
        omega = np.geomspace(lo, hi, points)
    elif scale == "linear":
        span = 1.5 * max(abs(m.detuning) for m in cfg.modes) + 20 * math.pi / seq.duration
        lo = float(opts["omega_min_khz"]) * khz if "omega_min_khz" in opts else -span
        hi = float(opts["omega_max_khz"]) * khz if "omega_max_khz" in opts else span
        omega = np.linspace(lo, hi, points)
    else:
        raise CommandError(f"unknown filter grid scale {scale!r}", EXIT_CONFIG)
    state = cfg.state or initial_state_from_z_label("11")
    pair = _pair(opts)
    curves = filter_curves(seq, cfg.modes, omega, state, pair)
    header = ["omega [rad/s]"] + [f"F_{k} [s^2]" for k in curves.mode_indices] + ["F [s^2]"]
    rows = (tuple([w, *col, tot]) for w, col, tot in
            zip(omega, curves.values.T, curves.combined))
    _write_csv(out / "filter.csv", header, rows)
    slopes = {m.index: low_frequency_slope(seq, m.detuning) for m in cfg.modes}
    _write_json(out / "filter.json", {
        "units": {"omega": "rad/s", "F": "s^2"},
        "D_k": dict(zip(map(str, curves.mode_indices), curves.weights)),
        "low_frequency_slope": {str(k): v for k, v in slopes.items()},
        "slope_window": "omega in [1e-4, 1e-2] / tau_s",
    })
    for k, s in slopes.items():
        print(f"  mode {k}: low-frequency slope {s:.3f}")
    return EXIT_OK, ["filter.csv", "filter.json"]


def cmd_purity(cfg: Config, out: Path, args) -> tuple[int, list[str]]:
    seq = _sequence(cfg)
    if not isinstance(cfg.noise, SpectrumNoise):
        raise CommandError("purity needs a spectral 'noise' section", EXIT_CONFIG)
    opts = cfg.analysis.get("purity", {})
    state = cfg.state or initial_state_from_z_label("11")
    pair = _pair(opts)
    n_real = int(opts.get("n_realizations", 2000))
    spec = purity_loss_spectral(seq, cfg.modes, state, cfg.noise, pair)
    mc = purity_loss_mc(seq, cfg.modes, cfg.drive, state, cfg.noise, n_real, seed=args.seed,
                        threads=args.threads,
                        samples_per_segment=int(opts.get("samples_per_segment", 64)),
                        pad=int(opts.get("pad", 8)), pair=pair)
    result = {"spectral": spec.value, "spectral_error": spec.error, "mc_mean": mc.mean,
              "mc_stderr": mc.stderr, "n_realizations": n_real, "seed": args.seed,
              "units": "dimensionless purity loss"}
    _write_json(out / "purity.json", result)
    print(f"  spectral  {spec.value:.6e} (quad err {spec.error:.1e})")
    print(f"  MC        {mc.mean:.6e} +- {mc.stderr:.1e}  ({n_real} realizations)")
    return EXIT_OK, ["purity.json"]


def cmd_calibrate(cfg: Config, out: Path, args) -> tuple[int, list[str]]:
    seq = _sequence(cfg)
    opts = cfg.analysis.get("calibrate", {})
    pair = _pair(opts)
    target = float(opts.get("target_rad", DEFAULT_TARGET))
    omega = calibrate_rabi(seq, cfg.modes, pair, target, cfg.drive)
    report = entangling_phase(seq, cfg.modes, cfg.drive.with_rabi(omega), pair)
    per_mode = [{"mode": k, "A": a, "B": b, "contribution_rad": c}
                for k, a, b, c in zip(report.mode_indices, report.a_terms, report.b_terms,
                                      report.contributions)]
    result = {
        "rabi_rate_rad_s": omega,
        "rabi_rate_khz": omega / (2 * math.pi * 1e3),
        "pair": list(pair),
        "target_phi_12_rad": target,
        "phi_12_rad": report.total,
        "gate_phase_2phi_12_rad": report.gate_phase,
        "conventions": {
            "phi_12": "propagator exp(... + 2i phi_12 sx1 sx2)",
            "gate_phase": "2 phi_12 = sum over ordered pairs phi_mu_nu; pi/4 is maximally entangling",
        },
        "per_mode": per_mode,
    }
    _write_json(out / "calibrate.json", result)
    print(f"  Omega = {omega:.6e} rad/s = 2pi x {omega / (2 * math.pi * 1e3):.4f} kHz")
    print(f"  phi_12 = {report.total:.12f} rad   2*phi_12 = {report.gate_phase:.12f} rad")
    print("  mode   contribution [rad]")
    for rec in per_mode:
        print(f"  {rec['mode']:4d}   {rec['contribution_rad']: .6e}")
    return EXIT_OK, ["calibrate.json"]


def cmd_validate(cfg: Config | None, out: Path, args) -> tuple[int, list[str]]:
    from .validation import as_records, run_validation

    def show(c):
        flag = "PASS" if c.passed else "FAIL"
        print(f"  [{flag}] {c.name:<52s} {c.measured:11.3e} <= {c.tolerance:8.1e}  {c.detail}")

    checks = run_validation(threads=args.threads or 1, progress=show)
    _write_json(out / "validate.json", {"checks": as_records(checks),
                                        "all_passed": all(c.passed for c in checks)})
    code = EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION
    return code, ["validate.json"]


COMMANDS = {
    "synth": cmd_synth,
    "trace": cmd_trace,
    "filter": cmd_filter,
    "purity": cmd_purity,
    "calibrate": cmd_calibrate,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phasegate", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="YAML/JSON config document")
    p.add_argument("--out", type=Path, default=Path("phasegate_out"), help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="parallelism degree (env PHASEGATE_THREADS); never changes results")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads is None:
        args.threads = int(os.environ.get("PHASEGATE_THREADS", "1"))

    cfg = None
    try:
        if args.config is None and args.command != "validate":
            raise ConfigError("--config is required")
        if args.config is not None:
            cfg = load_config_file(args.config)
            _warn_irrelevant(args.command, cfg)
        args.out.mkdir(parents=True, exist_ok=True)
        code, files = COMMANDS[args.command](cfg, args.out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (PreconditionError, CalibrationError, ValueError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION

    manifest = {
        "command": args.command,
        "config_path": str(args.config) if args.config else None,
        "output_dir": str(args.out),
        "seed": args.seed,
        "threads": args.threads,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": files,
        "exit_code": code,
    }
    _write_json(args.out / f"manifest_{args.command}.json", manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
