"""Command-line experiment runner.

Subcommands: ``run`` executes a TOML experiment config and writes
plot-ready CSV plus a JSON run report; ``validate`` prints config
diagnostics without running; ``presets`` lists the bundled level-scheme
presets.  Scans land in CSV (header first, ``#`` comment lines carrying
the config hash); structured results land in the JSON report.  All
files are written atomically (temp file, then rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .analysis import (ac_stark_shift, cnot_truth_table, crosstalk_bound,
                       dark_states, effective_rabi, eit_spectrum,
                       eliminated_eit_hamiltonian, ghz_scaling, parity_curve,
                       raman_transfer_scan, run_bell)
from .config import (_build_preset, config_hash, has_errors, load_config,
                     validate_config)
from .integrate import IntegratorConfig, IntegratorError
from .pulses import duration_for_pi_area
from .units import TWO_PI, to_mhz

TOOL = "eitgate"


# -- artifact writers -------------------------------------------------------

def _atomic_write_bytes(path, payload):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt_float(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header, rows, comments=()):
    lines = [",".join(header)]
    lines.extend(f"# {c}" for c in comments)
    for row in rows:
        lines.append(",".join(_fmt_float(v) for v in row))
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    return value


def write_report(path, report):
    payload = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    _atomic_write_bytes(path, (payload + "\n").encode())


# -- protocol execution -----------------------------------------------------

def _scan_values(config):
    scan = config.scan
    return TWO_PI * 1e6 * np.linspace(scan["start_mhz"], scan["stop_mhz"],
                                      scan["points"])


def _integrator(config):
    return IntegratorConfig(rtol=config.integrator.get("rtol", 1e-8),
                            atol=config.integrator.get("atol", 1e-11))


def _tau(config, preset):
    tau_us = config.pulse.get("tau_us")
    return preset.tau if tau_us is None else tau_us * 1e-6


def _run_raman_scan(config, preset, out_dir, hash_comments):
    scan = raman_transfer_scan(preset, _scan_values(config),
                               tau=_tau(config, preset),
                               config=_integrator(config))
    path = os.path.join(out_dir, "raman_scan.csv")
    write_csv(path, ("delta_mhz", "transfer_error"),
              [(to_mhz(v), m) for v, m in scan.rows()], hash_comments)
    payload = {
        "optimum_delta_mhz": to_mhz(scan.optimum),
        "min_transfer_error": scan.minimum,
    }
    return payload, [path]


def _run_eit_spectrum(config, preset, out_dir, hash_comments):
    scan = eit_spectrum(preset, _scan_values(config),
                        tau=_tau(config, preset),
                        config=_integrator(config))
    path = os.path.join(out_dir, "eit_spectrum.csv")
    write_csv(path, ("coupling_detuning_mhz", "transfer"),
              [(to_mhz(v), m) for v, m in scan.rows()], hash_comments)
    payload = {
        "resonance_mhz": to_mhz(scan.optimum),
        "min_transfer": scan.minimum,
    }
    return payload, [path]


def _run_cnot_table(config, preset, out_dir, hash_comments):
    gate = config.gate
    table = cnot_truth_table(preset, config=_integrator(config),
                             reduced=gate.get("reduced", False),
                             coupling_on_control=gate.get(
                                 "coupling_on_control", False),
                             ideal_control=gate.get("ideal_control", False),
                             tau=_tau(config, preset))
    path = os.path.join(out_dir, "cnot_table.csv")
    labels = ("00", "01", "10", "11")
    rows = []
    for kind, matrix in (("raw", table.raw), ("corrected", table.corrected)):
        for i, row in enumerate(matrix):
            rows.append((kind, labels[i]) + tuple(float(x) for x in row))
    write_csv(path, ("kind", "input") + tuple("out_" + l for l in labels),
              rows, hash_comments)
    payload = {
        "fidelity_raw": table.fidelity_raw,
        "fidelity": table.fidelity,
        "health": table.health,
    }
    return payload, [path]


def _run_bell(config, preset, out_dir, hash_comments):
    gate = config.gate
    state, report, _res = run_bell(
        preset, config=_integrator(config),
        reduced=gate.get("reduced", False),
        coupling_on_control=gate.get("coupling_on_control", False),
        ideal_control=gate.get("ideal_control", False),
        tau=_tau(config, preset))
    return report.to_dict(), []


def _run_parity(config, preset, out_dir, hash_comments):
    gate = config.gate
    state, report, _res = run_bell(
        preset, config=_integrator(config),
        reduced=gate.get("reduced", False),
        coupling_on_control=gate.get("coupling_on_control", False),
        ideal_control=gate.get("ideal_control", False),
        tau=_tau(config, preset))
    phases = np.linspace(0.0, 2.0 * np.pi, config.parity.get("points", 64),
                         endpoint=False)
    fit = parity_curve(state, phases)
    path = os.path.join(out_dir, "parity.csv")
    write_csv(path, ("phase_rad", "parity"),
              list(zip(fit.phases.tolist(), fit.signal.tolist())),
              hash_comments)
    payload = {
        "bell": report.to_dict(),
        "amplitude": fit.amplitude,
        "phase_rad": fit.phase,
        "offset": fit.offset,
        "fit_residual": fit.residual,
    }
    return payload, [path]


def _run_ghz(config, preset, out_dir, hash_comments):
    run = config.run
    k_max = config.ghz.get("k", 2)
    res = ghz_scaling(
        preset, ks=tuple(range(1, k_max + 1)),
        geometry=config.geometry.get("kind", "star"),
        spacing_um=config.geometry.get("spacing_um"),
        suppress_target_target=config.ghz.get("suppress_target_target", True),
        method=run.get("method", "dense"),
        n_trajectories=run.get("trajectories", 2500),
        seed=run.get("seed", 1234),
        config=_integrator(config), tau=_tau(config, preset))
    path = os.path.join(out_dir, "ghz_scaling.csv")
    f1 = res.fidelities[1]
    rows = [(k, res.fidelities[k], res.sems[k], f1 ** k, res.product_law[k])
            for k in res.ks]
    write_csv(path, ("k", "fidelity", "sem", "f1_pow_k", "product_gap"),
              rows, hash_comments)
    payload = {
        "fidelities": {str(k): res.fidelities[k] for k in res.ks},
        "sems": {str(k): res.sems[k] for k in res.ks},
        "max_product_violation": res.max_violation,
        "configuration": res.configuration,
    }
    return payload, [path]


def _strongest_path(scheme):
    """(omega_p rms, omega_c, delta) of the intermediate with the most
    two-photon weight."""
    best = None
    for label in scheme.intermediate_labels():
        o0 = o1 = oc = 0.0
        for cp in scheme.couplings:
            if cp.upper == label and cp.lower == "q0":
                o0 = cp.peak_rabi
            elif cp.upper == label and cp.lower == "q1":
                o1 = cp.peak_rabi
            elif cp.lower == label:
                oc = cp.peak_rabi
        delta = -scheme.level(label).energy_offset
        weight = abs(o0 * o1 / delta) if delta else 0.0
        if best is None or weight > best[0]:
            best = (weight, label, o0, o1, oc, delta)
    if best is None:
        raise ValueError("scheme has no intermediate levels")
    _w, label, o0, o1, oc, delta = best
    return label, np.sqrt(0.5 * (o0 ** 2 + o1 ** 2)), oc, delta


def _run_darkstate(config, preset, out_dir, hash_comments):
    label, omega_p, omega_c, delta = _strongest_path(preset.target)
    d1, d2 = dark_states(omega_p, omega_c)
    h = eliminated_eit_hamiltonian(omega_p, omega_c, delta)
    payload = {
        "intermediate": label,
        "omega_p_mhz": to_mhz(omega_p),
        "omega_c_mhz": to_mhz(omega_c),
        "delta_mhz": to_mhz(delta),
        "d1": d1.tolist(),
        "d2": d2.tolist(),
        "mixing_ratio": float(np.sqrt(2.0) * omega_p / omega_c),
        "nullity_residual": max(float(np.max(np.abs(h @ d1))),
                                float(np.max(np.abs(h @ d2)))),
    }
    return payload, []


def _run_shifts(config, preset, out_dir, hash_comments):
    scheme = preset.target
    omega = effective_rabi(scheme)
    rows = []
    for cp in scheme.couplings:
        rows.append((cp.name, cp.lower, cp.upper, to_mhz(cp.peak_rabi),
                     cp.phase))
    path = os.path.join(out_dir, "couplings.csv")
    write_csv(path, ("name", "lower", "upper", "peak_rabi_mhz", "phase_rad"),
              rows, hash_comments)
    waist_um = config.overrides.get("waist_um") or 3.0
    payload = {
        "effective_rabi_mhz": to_mhz(omega),
        "pi_window_us": duration_for_pi_area(omega) * 1e6,
        "ac_stark_shift_mhz": to_mhz(ac_stark_shift(scheme)),
        "crosstalk_intensity_ratio": crosstalk_bound(
            waist_um, preset.spacing_um),
    }
    return payload, [path]


_RUNNERS = {
    "raman_scan": _run_raman_scan,
    "eit_spectrum": _run_eit_spectrum,
    "cnot_table": _run_cnot_table,
    "bell": _run_bell,
    "parity": _run_parity,
    "ghz": _run_ghz,
    "darkstate": _run_darkstate,
    "shifts": _run_shifts,
}


def execute(config, out_dir):
    """Run a validated config; returns the report dictionary."""
    digest = config_hash(config)
    comments = (f"{TOOL} {__version__} protocol={config.protocol}",
                f"config sha256 {digest}")
    preset = _build_preset(config)
    threads = config.run.get("threads")
    if threads:
        os.environ["EITGATE_THREADS"] = str(threads)
    start = time.monotonic()
    payload, artifacts = _RUNNERS[config.protocol](config, preset, out_dir,
                                                   comments)
    wall = time.monotonic() - start
    report = {
        "tool": TOOL,
        "version": __version__,
        "protocol": config.protocol,
        "parameters": config.to_dict(),
        "config_sha256": digest,
        "seed": config.run.get("seed"),
        "wall_time_s": wall,
        "payload": payload,
        "artifacts": [os.path.basename(a) for a in artifacts],
    }
    report_path = os.path.join(out_dir, f"{config.protocol}_report.json")
    write_report(report_path, report)
    return report, [report_path] + artifacts


# -- entry point ------------------------------------------------------------

def _print_diagnostics(diags, stream):
    for d in diags:
        print(str(d), file=stream)


def _apply_flag_overrides(config, args):
    if args.seed is not None:
        config.run["seed"] = args.seed
    if args.trajectories is not None:
        config.run["trajectories"] = args.trajectories
        config.run["method"] = "trajectories"
    if args.threads is not None:
        config.run["threads"] = args.threads


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog=TOOL,
        description="Simulate blockade-conditioned clock-state transfer "
                    "gates and their calibration scans.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="TOML experiment description")
    p_run.add_argument("--out-dir", default=".", help="artifact directory")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--trajectories", type=int, default=None,
                       help="switch to the trajectory engine with this "
                            "sample count")
    p_run.add_argument("--threads", type=int, default=None)

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config")

    sub.add_parser("presets", help="list bundled level-scheme presets")

    args = parser.parse_args(argv)

    if args.command == "presets":
        from .presets import preset_catalog
        for name, description in preset_catalog().items():
            print(f"{name}: {description}")
        return 0

    try:
        config, parse_diags = load_config(args.config)
    except OSError as exc:
        print(f"error: (file): {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        diags = validate_config(config, parse_diags)
        _print_diagnostics(diags, sys.stdout)
        if not diags:
            print("ok")
        return 2 if has_errors(diags) else 0

    _apply_flag_overrides(config, args)
    diags = validate_config(config, parse_diags)
    _print_diagnostics(diags, sys.stderr)
    if has_errors(diags):
        return 2

    try:
        report, paths = execute(config, args.out_dir)
    except IntegratorError as exc:
        print(f"error: integrator: {exc}", file=sys.stderr)
        return 3
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
