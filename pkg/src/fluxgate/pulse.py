"""Flat-top Gaussian flux pulse.

The pulse ramps qubit B's reduced flux from pi to pi + delta_phi and back:

    phi(t) = pi + C * delta_phi * (exp[-A tbar (tbar - t_r) / t_r^2] - 1)

on the ramps (tbar = t on the way up, t - t_p on the way down) and
phi = pi + delta_phi on the plateau, with C = 1 / (exp(A/4) - 1) chosen so the
ramp meets the plateau exactly.  The waveform is evaluated analytically at
arbitrary t so adaptive integrators see exact values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Factor by which an inequality must hold to count as a strict separation.
STRICT_MARGIN = 3.0


@dataclass(frozen=True)
class PulseParams:
    """Flat-top Gaussian pulse parameters.

    t_r is the total ramp time (up plus down), t_p the plateau duration, both
    in ns; a_env the dimensionless Gaussian envelope parameter; delta_phi the
    plateau detuning from pi in radians (may be negative).
    """

    t_r: float
    t_p: float
    a_env: float
    delta_phi: float

    def __post_init__(self) -> None:
        if not self.t_r > 0:
            raise ValueError("t_r must be positive")
        if self.t_p < 0:
            raise ValueError("t_p must be non-negative")
        if not self.a_env > 0:
            raise ValueError("a_env must be positive")

    @property
    def duration(self) -> float:
        return self.t_r + self.t_p


@dataclass(frozen=True)
class PulseSamples:
    times: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class AdiabaticityReport:
    """Outcome of the g/hbar << 1/t_r << min(omega) timescale check.

    The three rates are angular (rad/ns): coupling 2 pi g, ramp rate 1/t_r,
    and qubit frequency 2 pi omega_min.
    """

    status: str  # "strict" | "loose" | "fail"
    coupling_rate: float
    ramp_rate: float
    omega_rate: float

    @property
    def passed(self) -> bool:
        return self.status in ("strict", "loose")


def flux_at(params: PulseParams, t, strict: bool = False):
    """Reduced flux phi(t) in radians; scalar in, scalar out.

    Outside [0, t_r + t_p] the idle value pi is returned, or a ValueError is
    raised in strict mode.
    """
    t_arr = np.asarray(t, dtype=float)
    out_of_range = (t_arr < 0) | (t_arr > params.duration)
    if strict and np.any(out_of_range):
        raise ValueError("time outside the pulse window in strict mode")
    norm = 1.0 / (math.exp(params.a_env / 4.0) - 1.0)
    tbar = np.where(t_arr <= params.t_r / 2.0, t_arr, t_arr - params.t_p)
    ramp = math.pi + norm * params.delta_phi * (
        np.exp(-params.a_env * tbar * (tbar - params.t_r) / params.t_r**2) - 1.0
    )
    on_plateau = (t_arr >= params.t_r / 2.0) & (t_arr <= params.t_r / 2.0 + params.t_p)
    phi = np.where(on_plateau, math.pi + params.delta_phi, ramp)
    phi = np.where(out_of_range, math.pi, phi)
    return float(phi) if np.isscalar(t) or t_arr.ndim == 0 else phi


def validate_adiabaticity(
    params: PulseParams, g: float, omega_min: float
) -> AdiabaticityReport:
    """Check the timescale ordering g/hbar << 1/t_r << min(omega).

    ``g`` and ``omega_min`` are energies/frequencies as E/h in GHz and enter
    the comparison as angular rates 2 pi g and 2 pi omega_min against the
    ramp rate 1/t_r.  Both inequalities holding with a factor-STRICT_MARGIN
    margin counts as "strict"; holding plainly counts as "loose" (optimized
    gates remain accurate in that regime); otherwise "fail".
    """
    coupling = 2.0 * math.pi * abs(g)
    rate = 1.0 / params.t_r
    omega = 2.0 * math.pi * omega_min
    if STRICT_MARGIN * coupling < rate and STRICT_MARGIN * rate < omega:
        status = "strict"
    elif coupling < rate < omega:
        status = "loose"
    else:
        status = "fail"
    return AdiabaticityReport(
        status=status, coupling_rate=coupling, ramp_rate=rate, omega_rate=omega
    )


def sample(params: PulseParams, dt: float) -> PulseSamples:
    """Uniform sampling of the pulse including both endpoints.

    The final step is shortened so the grid lands exactly on t_r + t_p.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt > params.duration:
        raise ValueError(f"dt={dt} exceeds the pulse duration {params.duration}")
    times = np.arange(0.0, params.duration, dt)
    if times[-1] < params.duration:
        times = np.append(times, params.duration)
    return PulseSamples(times=times, values=flux_at(params, times))
