"""Command-line front end.

Subcommands: stark-map, operating-points, phonon, cnot, budgets. Each reads
an optional JSON config (defaults are the reference device), writes its
outputs to the configured directory and prints a JSON report that embeds
the resolved config and its hash.

Exit codes: 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import cavity as cav
from . import phonon
from .config import RunConfig
from .errors import ConfigurationError, NumericalError, ResonanceUnreachable
from .gate import CnotOptions, calibrate_cnot, plan_cnot, simulate_gate, write_trajectory_csv
from .hamiltonian import build_model
from .stark import operating_points, stark_map

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 2, 3, 4


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def _report(cfg: RunConfig, command: str, result: dict) -> dict:
    return {"command": command, "config_hash": cfg.digest(), "config": cfg.to_dict(),
            "result": _plain(result)}


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out(cfg, name):
    os.makedirs(cfg.output_dir, exist_ok=True)
    return os.path.join(cfg.output_dir, name)


def _setup(cfg: RunConfig):
    geom = cfg.build_geometry()
    s = cfg.sweep
    smap = stark_map(geom, s.field_lo, s.field_hi, s.n_steps, cfg.build_grid())
    cavity, laser = cfg.build_cavity(), cfg.build_laser()
    points = operating_points(geom, cavity, laser, smap, s.root_rule)
    return smap, points, cavity, laser


def cmd_stark_map(cfg: RunConfig) -> dict:
    s = cfg.sweep
    smap = stark_map(cfg.build_geometry(), s.field_lo, s.field_hi, s.n_steps, cfg.build_grid())
    path = _out(cfg, "stark_map.csv")
    smap.write_csv(path)
    i0 = int(np.argmin(np.abs(smap.fields)))
    return _report(cfg, "stark-map", {
        "csv": path, "provenance": smap.provenance,
        "anchor_field_MVpm": smap.fields[i0], "E10_meV": smap.E10[i0],
        "E20_meV": smap.E20[i0], "z01_nm": smap.z01[i0], "z12_nm": smap.z12[i0],
        "flagged_intervals": [list(x) for x in smap.flagged],
        "min_overlap": float(np.min(smap.min_overlap))})


def cmd_operating_points(cfg: RunConfig) -> dict:
    smap, points, cavity, laser = _setup(cfg)
    c = cav.couplings(points, cavity, laser, cfg.laser.half_amplitude)
    result = {"points": points.as_dict(), "hierarchy_ok": points.hierarchy_ok,
              "vacuum_field_V_per_m": cav.vacuum_field(cavity),
              "couplings": {k: v.as_dict() for k, v in c.items()},
              "two_photon_pi_time_ns": np.pi / c["two_photon"].Otilde,
              "cavity_pi_time_ns": np.pi / (2 * c["cavity"].g01)}
    rep = _report(cfg, "operating-points", result)
    _write_json(_out(cfg, "operating_points.json"), rep)
    return rep


def cmd_phonon(cfg: RunConfig, e10=None, sweep=None) -> dict:
    env, shape = cfg.build_phonon()
    tol = cfg.tolerances
    if e10 is None:
        e10 = 12.25
    k, a, b = phonon.dimensionless_params(e10, env, shape)
    pref = phonon.golden_rule_prefactor(e10, env)
    rate, tau = phonon.relaxation_rate(e10, env, shape, tol.phonon_epsrel, tol.phonon_inner_epsrel)
    result = {"E10_meV": e10, "K10_per_nm": k, "alpha": a, "beta": b,
              "norm_inverse": shape.norm_inverse, "prefactor_per_s": pref,
              "integral": rate / pref, "rate_per_s": rate, "tau_s": tau}
    energies = sweep if sweep else cfg.sweep.phonon_energies
    if energies:
        rows = phonon.lifetime_sweep(energies, env, shape, tol.phonon_epsrel)
        path = _out(cfg, "phonon_sweep.csv")
        phonon.write_sweep_csv(path, rows)
        result["sweep_csv"] = path
    rep = _report(cfg, "phonon", result)
    _write_json(_out(cfg, "phonon.json"), rep)
    return rep


def cmd_cnot(cfg: RunConfig, trajectory=False) -> dict:
    g = cfg.gate
    smap, points, cavity, laser = _setup(cfg)
    c = cav.couplings(points, cavity, laser, cfg.laser.half_amplitude)
    model = build_model(smap, points, cavity, laser, 2, "full", g.nonadiabatic,
                        cfg.laser.half_amplitude)
    opt = CnotOptions(kernel_only=g.mode == "kernel", rise_time=g.rise_time,
                      rotation_laser_scale=g.rotation_laser_scale)
    info = {}
    if g.model == "effective":
        model = model.with_(model="effective", two_photon_rate=c["two_photon"].Otilde)
    elif g.calibrate:
        opt, info = calibrate_cnot(points, c, model, opt, g.dt_max)
        model = build_model(smap, points, cavity, laser, 2, "full", g.nonadiabatic,
                            cfg.laser.half_amplitude, extra_fields=[opt.two_photon_field])
    seq = plan_cnot(points, c, opt, model)
    rep, ev = simulate_gate(seq, model, g.dt_max, sample=trajectory, sample_dt=0.05)
    rep.notes.update(calibration=info)
    result = rep.to_dict()
    if trajectory:
        path = _out(cfg, "cnot_trajectory.csv")
        write_trajectory_csv(path, ev, model)
        result["trajectory_csv"] = path
    out = _report(cfg, "cnot", result)
    _write_json(_out(cfg, "cnot_report.json"), out)
    return out


def cmd_budgets(cfg: RunConfig, temperature=4.0, e10=None) -> dict:
    smap, points, cavity, laser = _setup(cfg)
    c = cav.couplings(points, cavity, laser, cfg.laser.half_amplitude)
    e10 = float(smap.E10[0]) if e10 is None else e10
    result = cav.budgets(e10, c["cavity"].g01, temperature)
    result["g01_rad_per_ns"] = c["cavity"].g01
    rep = _report(cfg, "budgets", result)
    _write_json(_out(cfg, "budgets.json"), rep)
    return rep


def _parser():
    p = argparse.ArgumentParser(prog="thzqd", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON config file (defaults: reference device)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    sm = sub.add_parser("stark-map", help="level energies and dipoles vs field")
    sm.add_argument("--field-lo", type=float)
    sm.add_argument("--field-hi", type=float)
    sm.add_argument("--n-steps", type=int)
    sub.add_parser("operating-points", help="resonance fields and coupling rates")
    ph = sub.add_parser("phonon", help="LA-phonon relaxation time")
    ph.add_argument("--e10", type=float, help="level spacing in meV (default 12.25)")
    ph.add_argument("--sweep", type=float, nargs="+", help="E10 values for a CSV sweep")
    cn = sub.add_parser("cnot", help="simulate the CNOT or its controlled-phase kernel")
    cn.add_argument("--mode", choices=["kernel", "full"])
    cn.add_argument("--effective", action="store_true", help="use the effective two-photon model")
    cn.add_argument("--delta-t", type=float, help="ramp time in ns")
    cn.add_argument("--fock-cutoff", type=int)
    cn.add_argument("--trajectory", action="store_true", help="also write a trajectory CSV")
    bu = sub.add_parser("budgets", help="initialization and readout figures")
    bu.add_argument("--temperature", type=float, default=4.0)
    bu.add_argument("--e10", type=float)
    return p


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.out:
        cfg.output_dir = args.out
    if args.command == "stark-map":
        for k in ("field_lo", "field_hi", "n_steps"):
            v = getattr(args, k)
            if v is not None:
                setattr(cfg.sweep, k, v)
    if args.command == "cnot":
        if args.mode:
            cfg.gate.mode = args.mode
        if args.effective:
            cfg.gate.model = "effective"
        if args.delta_t is not None:
            cfg.gate.rise_time = args.delta_t
        if args.fock_cutoff is not None:
            cfg.cavity.fock_cutoff = args.fock_cutoff
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        cfg = _apply_overrides(cfg, args)
        if args.command == "stark-map":
            rep = cmd_stark_map(cfg)
        elif args.command == "operating-points":
            rep = cmd_operating_points(cfg)
        elif args.command == "phonon":
            rep = cmd_phonon(cfg, args.e10, args.sweep)
        elif args.command == "cnot":
            rep = cmd_cnot(cfg, args.trajectory)
        else:
            rep = cmd_budgets(cfg, args.temperature, args.e10)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResonanceUnreachable as exc:
        print(f"numerical error: {exc} (achievable range {exc.energy_range})", file=sys.stderr)
        return EXIT_NUMERIC
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps(rep, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
