#!/usr/bin/env python3
"""Evaluate the five high-fidelity working points and print a summary table.

Optionally add relaxation with --t1-us to also report the chi-matrix gate
fidelity at each point.
"""

import argparse
import math

from fluxgate import PulseParams, evaluate_gate
from fluxgate.config import default_config, load_config

WORKING_POINTS = {
    "a": (25.85, 0.0705),
    "b": (7.30, 0.0705),
    "c": (12.05, 0.0674),
    "d": (9.00, 0.07482),
    "e": (6.95, 0.0723),
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=None)
    parser.add_argument("--t1-us", type=float, default=None)
    args = parser.parse_args()

    cfg = load_config(args.config) if args.config else default_config()
    system = cfg.build_system()
    opts = cfg.integrator.to_options()

    header = f"{'point':>5} {'t_p (ns)':>9} {'dphi/pi':>8} {'1-F':>10} {'P':>7} {'zeta':>6}"
    if args.t1_us:
        header += f" {'1-F_g':>10}"
    print(header)
    for name, (t_p, dphi) in WORKING_POINTS.items():
        pulse = PulseParams(t_r=7.05, t_p=t_p, a_env=16.741, delta_phi=dphi * math.pi)
        rep = evaluate_gate(system, pulse, opts, t1_us=args.t1_us)
        row = (
            f"{name:>5} {t_p:9.2f} {dphi:8.4f} {rep.coherent_error:10.2e} "
            f"{rep.entangling_power:7.4f} {rep.zeta:6.3f}"
        )
        if args.t1_us:
            row += f" {1 - rep.f_g:10.2e}"
        print(row)


if __name__ == "__main__":
    main()
