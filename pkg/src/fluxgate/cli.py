"""Command-line entry point.

Subcommands map one-to-one onto the figure-class computations: ``spectrum``
(flux sweeps of the single- and two-qubit levels), ``gate`` (one pulse through
the full pipeline), ``optimize``/``scan2d``/``noise`` (the scan harnesses,
resumable per point), and ``trajectory`` (instantaneous-basis Bloch data).
All outputs are plot-ready CSV/JSON files plus a JSON manifest.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys as _sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, default_config, load_config
from .coupled import find_level_crossing, write_spectrum_csv
from .errors import ConfigError
from .evolution import (
    export_chi_json,
    export_propagator_json,
    instantaneous_trajectory,
    write_trajectory_csv,
)
from .fluxonium import build_oscillator_rep, hamiltonian_at_flux
from .optimize import scan_2d, scan_detuning, noise_sensitivity
from .pipeline import evaluate_gate, write_report_json

LOCK_NAME = ".fluxgate.lock"


class OutputLock:
    """Reject concurrent runs writing into the same output directory."""

    def __init__(self, out_dir: Path):
        self.path = out_dir / LOCK_NAME
        self.fd = None

    def __enter__(self):
        try:
            self.fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise SystemExit(
                f"output directory is locked by another run ({self.path}); "
                "remove the lock file if that run is dead"
            )
        os.write(self.fd, str(os.getpid()).encode())
        return self

    def __exit__(self, *exc):
        if self.fd is not None:
            os.close(self.fd)
            self.path.unlink(missing_ok=True)


def _thread_count(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("FLUXGATE_THREADS")
    return int(env) if env else 1


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    return cfg


def _t1_from_config(cfg: RunConfig):
    """t1_us list -> None, a shared value, or a per-qubit (T1_A, T1_B) pair."""
    if not cfg.t1_us:
        return None
    if len(cfg.t1_us) == 1:
        return cfg.t1_us[0]
    if len(cfg.t1_us) == 2:
        return tuple(cfg.t1_us)
    raise ConfigError("t1_us must hold zero, one, or two relaxation times")


def _write_manifest(out: Path, args, cfg: RunConfig, t0: float, extra: dict) -> None:
    manifest = {
        "command": args.command,
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "wall_time_s": time.time() - t0,
    }
    manifest.update(extra)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)


def cmd_spectrum(args) -> int:
    cfg = _load(args)
    if args.phi_points < 2 or args.phi_stop <= args.phi_start:
        raise SystemExit("spectrum: empty flux range; need phi_stop > phi_start and >= 2 points")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    with OutputLock(out):
        sys_ = cfg.build_system()
        phis = np.linspace(args.phi_start, args.phi_stop, args.phi_points) * math.pi

        single_path = out / "spectrum_single_qubit.csv"
        reps = {
            "a": (build_oscillator_rep(cfg.qubit_a.to_params(), cfg.basis.osc_dim),
                  cfg.qubit_a.to_params()),
            "b": (build_oscillator_rep(cfg.qubit_b.to_params(), cfg.basis.osc_dim),
                  cfg.qubit_b.to_params()),
        }
        with open(single_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["phi_over_pi", "omega_a_ghz", "omega_b_ghz"])
            for phi in phis:
                row = [f"{phi / math.pi:.17g}"]
                for key in ("a", "b"):
                    rep, params = reps[key]
                    # qubit A stays parked at its sweet spot; only B follows phi
                    w = np.linalg.eigvalsh(
                        hamiltonian_at_flux(rep, params, math.pi if key == "a" else phi)
                    )
                    row.append(f"{w[1] - w[0]:.17g}")
                writer.writerow(row)

        two_path = out / "spectrum_two_qubit.csv"
        write_spectrum_csv(two_path, phis, sys_)
        dphi_star, splitting = find_level_crossing(sys_)
        _write_manifest(out, args, cfg, t0, {
            "outputs": [str(single_path), str(two_path)],
            "crossing": {"delta_phi_star_over_pi": dphi_star / math.pi,
                         "splitting_ghz": splitting},
        })
    return 0


def cmd_gate(args) -> int:
    cfg = _load(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    with OutputLock(out):
        sys_ = cfg.build_system()
        pulse = cfg.pulse.to_params()
        opts = cfg.integrator.to_options()
        report = evaluate_gate(
            sys_, pulse, opts, t1_us=_t1_from_config(cfg),
            dissipator=cfg.integrator.dissipator_convention,
        )
        outputs = []
        report_path = out / "gate_report.json"
        write_report_json(report_path, report)
        outputs.append(str(report_path))
        prop_path = out / "propagator.json"
        export_propagator_json(prop_path, report.propagator)
        outputs.append(str(prop_path))
        if report.chi_sim is not None:
            chi_path = out / "chi_sim.json"
            export_chi_json(chi_path, report.chi_sim)
            outputs.append(str(chi_path))
        if not report.entangling:
            print(
                f"note: gate is non-entangling (P = {report.entangling_power:.2e} < 1e-3)",
                file=_sys.stderr,
            )
        if args.trajectory:
            label = cfg.trajectory.initial_state
            idx = {"00": (0, 0), "01": (0, 1), "10": (1, 0), "11": (1, 1)}[label]
            psi0 = sys_.eigvecs_pi[:, sys_.labels_pi[idx]]
            points = instantaneous_trajectory(
                sys_, pulse, psi0, dt_out=cfg.trajectory.dt_out_ns, opts=opts
            )
            traj_path = out / f"trajectory_{label}.csv"
            write_trajectory_csv(traj_path, points)
            outputs.append(str(traj_path))
        _write_manifest(out, args, cfg, t0, {"outputs": outputs})
    return 0


def cmd_optimize(args) -> int:
    cfg = _load(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    with OutputLock(out):
        sys_ = cfg.build_system()
        opts = cfg.integrator.to_options()
        spec = cfg.optimizer.to_spec(cfg.seed, _t1_from_config(cfg))
        values = np.asarray(cfg.scan.delta_phi_over_pi, dtype=float) * math.pi
        result = scan_detuning(sys_, values, spec, opts, resume_dir=out / "points")
        csv_path = out / "detuning_scan.csv"
        result.to_csv(csv_path)
        n_failed = sum(not p.converged for p in result.points)
        _write_manifest(out, args, cfg, t0, {
            "outputs": [str(csv_path)],
            "n_points": len(result.points),
            "n_failed": n_failed,
        })
        if n_failed:
            _write_failures(out, [i for i, p in enumerate(result.points) if not p.converged])
            return 1
    return 0


def cmd_scan2d(args) -> int:
    cfg = _load(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    with OutputLock(out):
        sys_ = cfg.build_system()
        opts = cfg.integrator.to_options()
        dphis = np.asarray(cfg.scan.delta_phi_over_pi, dtype=float) * math.pi
        t_ps = np.asarray(
            cfg.scan.t_p_ns if cfg.scan.t_p_ns else np.linspace(0.0, 30.0, 40).tolist(),
            dtype=float,
        )
        result = scan_2d(
            sys_, dphis, t_ps, cfg.pulse.t_r_ns, cfg.pulse.envelope_a, opts,
            workers=_thread_count(args),
        )
        csv_path = out / "fidelity_map.csv"
        result.to_csv(csv_path)
        _write_manifest(out, args, cfg, t0, {
            "outputs": [str(csv_path)],
            "n_points": len(result.points),
            "n_failed": 0,
        })
    return 0


def cmd_noise(args) -> int:
    cfg = _load(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    with OutputLock(out):
        sys_ = cfg.build_system()
        opts = cfg.integrator.to_options()
        line = cfg.scan.noise.to_line(cfg.pulse)
        result = noise_sensitivity(
            sys_, line, list(cfg.t1_us), opts,
            dissipator=cfg.integrator.dissipator_convention,
            resume_dir=out / "points",
        )
        csv_path = out / f"noise_{line.vary}.csv"
        result.to_csv(csv_path)
        _write_manifest(out, args, cfg, t0, {
            "outputs": [str(csv_path)],
            "n_points": line.values.size,
            "n_failed": 0,
        })
    return 0


def cmd_trajectory(args) -> int:
    cfg = _load(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    with OutputLock(out):
        sys_ = cfg.build_system()
        pulse = cfg.pulse.to_params()
        opts = cfg.integrator.to_options()
        label = cfg.trajectory.initial_state
        if label not in ("00", "01", "10", "11"):
            raise SystemExit(f"trajectory: unknown initial state {label!r}")
        idx = {"00": (0, 0), "01": (0, 1), "10": (1, 0), "11": (1, 1)}[label]
        psi0 = sys_.eigvecs_pi[:, sys_.labels_pi[idx]]
        points = instantaneous_trajectory(
            sys_, pulse, psi0, dt_out=cfg.trajectory.dt_out_ns, opts=opts
        )
        csv_path = out / f"trajectory_{label}.csv"
        write_trajectory_csv(csv_path, points)
        _write_manifest(out, args, cfg, t0, {"outputs": [str(csv_path)]})
    return 0


def _write_failures(out: Path, indices: list[int]) -> None:
    with open(out / "failures.json", "w") as fh:
        json.dump({"failed_points": indices}, fh, indent=2)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxgate",
        description="Flux-pulse entangling-gate simulator for coupled fluxonium qubits",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=str, default=None, help="JSON run configuration")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (falls back to FLUXGATE_THREADS)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--strict", action="store_true",
                       help="escalate numerical warnings to errors")

    p = sub.add_parser("spectrum", help="single- and two-qubit spectrum flux sweeps")
    common(p)
    p.add_argument("--phi-start", type=float, default=0.8, help="sweep start in units of pi")
    p.add_argument("--phi-stop", type=float, default=1.2, help="sweep end in units of pi")
    p.add_argument("--phi-points", type=int, default=201)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("gate", help="run one pulse through the full pipeline")
    common(p)
    p.add_argument("--trajectory", action="store_true", help="also export the Bloch trajectory")
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("optimize", help="optimized error/duration vs plateau detuning")
    common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("scan2d", help="coherent-error map over (delta_phi, t_p)")
    common(p)
    p.set_defaults(func=cmd_scan2d)

    p = sub.add_parser("noise", help="gate error along a parameter cut, with relaxation")
    common(p)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("trajectory", help="instantaneous-basis Bloch trajectory")
    common(p)
    p.set_defaults(func=cmd_trajectory)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.strict:
        warnings.simplefilter("error")
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
