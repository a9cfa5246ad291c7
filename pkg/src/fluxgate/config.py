"""Run configuration: strict JSON schema with units embedded in key names.

Unit bugs are the dominant failure mode in this domain, so every scalar key
carries its unit (``_ghz``, ``_ns``, ``_us``, ``_over_pi``) and unknown keys
are rejected rather than ignored.  The defaults reproduce the reference
hardware parameter set.
"""

from __future__ import annotations

import dataclasses
import json
import math
import types
import typing
from dataclasses import dataclass, field

from .coupled import TwoQubitSystem, assemble
from .errors import ConfigError
from .evolution import IntegratorOptions
from .fluxonium import CircuitParams, build_oscillator_rep, diagonalize_and_truncate
from .optimize import NoiseLine, OptimizationSpec
from .pulse import PulseParams

#: Config key -> (internal pulse-parameter name, scale factor).
_PULSE_KEY_MAP = {
    "t_r_ns": ("t_r", 1.0),
    "t_p_ns": ("t_p", 1.0),
    "envelope_a": ("a_env", 1.0),
    "delta_phi_over_pi": ("delta_phi", math.pi),
}


@dataclass
class QubitSection:
    e_c_ghz: float
    e_l_ghz: float
    e_j_ghz: float
    phi_ext_over_pi: float = 1.0

    def to_params(self) -> CircuitParams:
        return CircuitParams(
            e_c=self.e_c_ghz,
            e_l=self.e_l_ghz,
            e_j=self.e_j_ghz,
            phi_ext=self.phi_ext_over_pi * math.pi,
        )


@dataclass
class BasisSection:
    osc_dim: int = 40
    n_levels: int = 5


@dataclass
class PulseSection:
    t_r_ns: float = 7.05
    t_p_ns: float = 7.30
    envelope_a: float = 16.741
    delta_phi_over_pi: float = 0.0705

    def to_params(self) -> PulseParams:
        return PulseParams(
            t_r=self.t_r_ns,
            t_p=self.t_p_ns,
            a_env=self.envelope_a,
            delta_phi=self.delta_phi_over_pi * math.pi,
        )


@dataclass
class IntegratorSection:
    method: str = "piecewise-exponential"
    max_step_ns: float = 0.002
    plateau_step_ns: float = 0.01
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    convergence_check: bool = False
    dissipator_convention: str = "standard"

    def to_options(self) -> IntegratorOptions:
        return IntegratorOptions(
            method=self.method,
            max_step=self.max_step_ns,
            plateau_step=self.plateau_step_ns,
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            convergence_check=self.convergence_check,
        )


@dataclass
class OptimizerSection:
    objective: str = "coherent_error"
    restarts: int = 8
    max_evals: int = 250
    fixed: dict = field(default_factory=lambda: {"delta_phi_over_pi": 0.0705})
    bounds: dict = field(
        default_factory=lambda: {
            "t_r_ns": [2.0, 15.0],
            "t_p_ns": [0.0, 40.0],
            "envelope_a": [4.0, 40.0],
        }
    )

    def to_spec(self, seed: int, t1_us) -> OptimizationSpec:
        fixed = {}
        for key, value in self.fixed.items():
            name, scale = _lookup_pulse_key(key, "optimizer.fixed")
            fixed[name] = float(value) * scale
        free = {}
        for key, value in self.bounds.items():
            name, scale = _lookup_pulse_key(key, "optimizer.bounds")
            if not (isinstance(value, (list, tuple)) and len(value) == 2):
                raise ConfigError(f"optimizer.bounds.{key} must be a [lower, upper] pair")
            free[name] = (float(value[0]) * scale, float(value[1]) * scale)
        return OptimizationSpec(
            fixed=fixed,
            free=free,
            objective=self.objective,
            restarts=self.restarts,
            seed=seed,
            max_evals=self.max_evals,
            t1_us=t1_us if self.objective == "gate_error_lindblad" else None,
        )


@dataclass
class NoiseSection:
    vary: str = "delta_phi"
    t_p_ns: float = 6.95
    delta_phi_over_pi: float = 0.0723
    half_span_over_pi: float = 0.002
    half_span_ns: float = 1.0
    points: int = 21

    def to_line(self, pulse: PulseSection) -> NoiseLine:
        import numpy as np

        anchor = PulseParams(
            t_r=pulse.t_r_ns,
            t_p=self.t_p_ns,
            a_env=pulse.envelope_a,
            delta_phi=self.delta_phi_over_pi * math.pi,
        )
        if self.vary == "delta_phi":
            center = anchor.delta_phi
            span = self.half_span_over_pi * math.pi
        else:
            center = anchor.t_p
            span = self.half_span_ns
        values = np.linspace(center - span, center + span, self.points)
        return NoiseLine(anchor=anchor, vary=self.vary, values=values)


@dataclass
class ScanSection:
    delta_phi_over_pi: list = field(
        default_factory=lambda: [
            0.050, 0.060, 0.0652, 0.0668, 0.0674, 0.069, 0.0705, 0.073, 0.0752, 0.076, 0.080,
        ]
    )
    t_p_ns: list = field(default_factory=lambda: [])
    noise: NoiseSection = field(default_factory=NoiseSection)


@dataclass
class TrajectorySection:
    initial_state: str = "01"
    dt_out_ns: float = 0.02


@dataclass
class RunConfig:
    qubit_a: QubitSection = field(
        default_factory=lambda: QubitSection(e_c_ghz=1.5, e_l_ghz=1.0, e_j_ghz=3.8)
    )
    qubit_b: QubitSection = field(
        default_factory=lambda: QubitSection(e_c_ghz=0.9, e_l_ghz=1.0, e_j_ghz=3.0)
    )
    j_c_ghz: float = 0.3
    basis: BasisSection = field(default_factory=BasisSection)
    pulse: PulseSection = field(default_factory=PulseSection)
    integrator: IntegratorSection = field(default_factory=IntegratorSection)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    scan: ScanSection = field(default_factory=ScanSection)
    trajectory: TrajectorySection = field(default_factory=TrajectorySection)
    t1_us: list = field(default_factory=list)
    seed: int = 0
    output_dir: str = "out"

    def build_system(self) -> TwoQubitSystem:
        qubits = []
        for section in (self.qubit_a, self.qubit_b):
            params = section.to_params()
            rep = build_oscillator_rep(params, self.basis.osc_dim)
            qubits.append(
                diagonalize_and_truncate(rep, params, params.phi_ext, self.basis.n_levels)
            )
        return assemble(qubits[0], qubits[1], self.j_c_ghz)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _lookup_pulse_key(key: str, where: str) -> tuple[str, float]:
    if key not in _PULSE_KEY_MAP:
        raise ConfigError(
            f"{where}: unknown pulse parameter {key!r}; expected one of {sorted(_PULSE_KEY_MAP)}"
        )
    return _PULSE_KEY_MAP[key]


def _coerce(value, target_type, where: str):
    if dataclasses.is_dataclass(target_type):
        return _section_from_dict(target_type, value, where)
    origin = typing.get_origin(target_type)
    if origin in (types.UnionType, typing.Union):
        last_err = None
        for alt in typing.get_args(target_type):
            try:
                return _coerce(value, alt, where)
            except ConfigError as err:
                last_err = err
        raise last_err
    if target_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if target_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if target_type is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected a boolean, got {value!r}")
        return value
    if target_type is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if target_type in (list, dict):
        if not isinstance(value, target_type):
            raise ConfigError(f"{where}: expected {target_type.__name__}, got {value!r}")
        return value
    raise ConfigError(f"{where}: unsupported config value {value!r}")


def _section_from_dict(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    hints = typing.get_type_hints(cls)
    kwargs = {}
    for name, f in known.items():
        if name in data:
            kwargs[name] = _coerce(data[name], hints[name], f"{where}.{name}")
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise ConfigError(f"{where}: missing required key {name!r}")
    return cls(**kwargs)


def load_config(path) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: invalid JSON ({err})") from err
    return _section_from_dict(RunConfig, data, "config")


def default_config() -> RunConfig:
    return RunConfig()
