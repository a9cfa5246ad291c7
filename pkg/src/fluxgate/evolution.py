"""Time evolution of the coupled system through a flux pulse.

The default integrator treats the Hamiltonian as piecewise constant on a
few-ps grid and applies exact matrix exponentials built from batched
eigendecompositions; the plateau, where H is constant, is covered by a single
exponential.  An adaptive Runge-Kutta integrator (DOP853) is available as an
independent cross-check.  Open-system dynamics uses the same step unitaries
interleaved with exact single-qubit amplitude-damping Kraus maps in a
symmetric (Strang) splitting, which preserves trace and positivity to
roundoff.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import linear_sum_assignment

from .coupled import TwoQubitSystem
from .errors import NumericalError
from .pulse import PulseParams, flux_at
from .units import TWO_PI

UNITARITY_TOL = 1e-8
TRACE_TOL = 1e-8

INTEGRATOR_METHODS = ("piecewise-exponential", "adaptive-rk")
DISSIPATOR_CONVENTIONS = ("standard", "literal")

PAULI_1Q = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
PAULI_LABELS = tuple(a + b for a in "IXYZ" for b in "IXYZ")
PAULI_2Q = tuple(np.kron(a, b) for a in PAULI_1Q for b in PAULI_1Q)


@dataclass(frozen=True)
class IntegratorOptions:
    """Numerical knobs for the propagators.

    ``max_step`` bounds the piecewise-constant step on the ramps (ns);
    ``plateau_step`` is the coarser step used for open-system evolution on
    constant-H stretches.  ``rel_tol``/``abs_tol`` apply to the adaptive-rk
    method only.
    """

    method: str = "piecewise-exponential"
    max_step: float = 0.002
    plateau_step: float = 0.01
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    convergence_check: bool = False

    def __post_init__(self) -> None:
        if self.method not in INTEGRATOR_METHODS:
            raise ValueError(f"unknown integrator method {self.method!r}")
        if not (self.max_step > 0 and self.plateau_step > 0):
            raise ValueError("step sizes must be positive")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class PropagatorResult:
    """Propagator over the full space plus its computational-subspace block."""

    u_full: np.ndarray
    u_sim: np.ndarray
    leakage_per_state: np.ndarray
    unitarity_defect: float
    convergence_drift: float | None = None


@dataclass(frozen=True)
class ChiMatrix:
    """Process matrix in the two-qubit Pauli basis II, IX, ..., ZZ.

    Normalized so a trace-preserving unitary channel has trace 1; the trace
    deficit of a simulated channel is its leakage out of the computational
    subspace.
    """

    matrix: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True)
class TrajectoryPoint:
    """State snapshot in the instantaneous single-excitation basis."""

    t: float
    pop_01: float
    pop_10: float
    bloch_x: float
    bloch_y: float
    bloch_z: float
    residual: float


def _check_step(opts: IntegratorOptions, pulse: PulseParams) -> None:
    if opts.max_step > 0.01 * pulse.t_r:
        raise ValueError(
            f"max_step={opts.max_step} ns exceeds 0.01*t_r={0.01 * pulse.t_r} ns"
        )


def _step_unitaries(hams: np.ndarray, dt: float) -> np.ndarray:
    """exp(-2 pi i H dt) for a (k, d, d) stack of Hermitian matrices."""
    w, v = np.linalg.eigh(hams)
    phase = np.exp(-1j * TWO_PI * w * dt)
    return (v * phase[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


class PulsePropagator:
    """Factorized pulse propagator U(t_p) = U_down @ U_plateau(t_p) @ U_up.

    The ramp products and the plateau eigendecomposition are independent of
    the plateau duration, so scanning t_p costs one matrix product per point.
    The down ramp mirrors the up ramp, so its step unitaries are the same
    matrices composed in reverse order.
    """

    def __init__(self, sys: TwoQubitSystem, pulse: PulseParams, opts: IntegratorOptions):
        _check_step(opts, pulse)
        self.sys = sys
        self.pulse = pulse
        half = pulse.t_r / 2.0
        n_half = max(1, math.ceil(half / opts.max_step))
        dt = half / n_half
        if pulse.delta_phi == 0.0:
            w, v = np.linalg.eigh(sys.hamiltonian(math.pi))
            ramp = (v * np.exp(-1j * TWO_PI * w * half)) @ v.conj().T
            self.u_up = ramp
            self.u_down = ramp
            self._w_plat, self._v_plat = w, v
            return
        midpoints = (np.arange(n_half) + 0.5) * dt
        phis = flux_at(pulse, midpoints)
        steps = _step_unitaries(sys.hamiltonian(phis), dt)
        u_up = np.eye(sys.dim, dtype=complex)
        u_down = np.eye(sys.dim, dtype=complex)
        for k in range(n_half):
            u_up = steps[k] @ u_up
            u_down = u_down @ steps[k]
        self.u_up = u_up
        self.u_down = u_down
        self._w_plat, self._v_plat = np.linalg.eigh(
            sys.hamiltonian(math.pi + pulse.delta_phi)
        )

    def plateau_unitary(self, t_p: float) -> np.ndarray:
        v = self._v_plat
        return (v * np.exp(-1j * TWO_PI * self._w_plat * t_p)) @ v.conj().T

    def unitary(self, t_p: float | None = None) -> np.ndarray:
        """Full-pulse propagator, optionally overriding the plateau duration."""
        if t_p is None:
            t_p = self.pulse.t_p
        return self.u_down @ self.plateau_unitary(t_p) @ self.u_up


def _propagate_rk(sys: TwoQubitSystem, pulse: PulseParams, opts: IntegratorOptions) -> np.ndarray:
    dim = sys.dim

    def rhs(t, y):
        u = y.reshape(dim, dim)
        h = sys.hamiltonian(flux_at(pulse, float(t)))
        return (-1j * TWO_PI) * (h @ u).reshape(-1)

    sol = solve_ivp(
        rhs,
        (0.0, pulse.duration),
        np.eye(dim, dtype=complex).reshape(-1),
        method="DOP853",
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
    )
    if not sol.success:
        raise NumericalError(f"adaptive-rk propagation failed: {sol.message}")
    return sol.y[:, -1].reshape(dim, dim)


def project_computational(sys: TwoQubitSystem, u_full: np.ndarray) -> np.ndarray:
    """4x4 block of a full-space operator in the dressed computational basis."""
    comp = sys.computational_states
    return comp.conj().T @ u_full @ comp


def propagate_unitary(
    sys: TwoQubitSystem,
    pulse: PulseParams,
    opts: IntegratorOptions = IntegratorOptions(),
) -> PropagatorResult:
    """Solve i hbar dU/dt = H(phi(t)) U over the pulse and project.

    Raises NumericalError if the accumulated propagator violates unitarity
    beyond UNITARITY_TOL, which signals that a smaller step is needed.
    """
    if opts.method == "adaptive-rk":
        u_full = _propagate_rk(sys, pulse, opts)
    else:
        u_full = PulsePropagator(sys, pulse, opts).unitary()
    defect = float(np.abs(u_full.conj().T @ u_full - np.eye(sys.dim)).max())
    if defect > UNITARITY_TOL:
        raise NumericalError(
            f"unitarity defect {defect:.2e} exceeds {UNITARITY_TOL}; reduce max_step"
        )
    u_sim = project_computational(sys, u_full)
    leakage = 1.0 - np.sum(np.abs(u_sim) ** 2, axis=0)
    drift = None
    if opts.convergence_check:
        finer = replace(opts, max_step=opts.max_step / 2, convergence_check=False)
        half = propagate_unitary(sys, pulse, finer)
        drift = float(np.abs(u_sim - half.u_sim).max())
    return PropagatorResult(
        u_full=u_full,
        u_sim=u_sim,
        leakage_per_state=leakage,
        unitarity_defect=defect,
        convergence_drift=drift,
    )


# ---------------------------------------------------------------------------
# Open-system evolution
# ---------------------------------------------------------------------------


def _pulse_step_sequence(
    sys: TwoQubitSystem, pulse: PulseParams, opts: IntegratorOptions
) -> list[tuple[np.ndarray, float, int]]:
    """Step unitaries covering the pulse as (stack, dt, repeats) segments."""
    if pulse.delta_phi == 0.0:
        n = max(1, math.ceil(pulse.duration / opts.plateau_step))
        dt = pulse.duration / n
        step = _step_unitaries(sys.hamiltonian(math.pi)[None], dt)
        return [(step, dt, n)]
    _check_step(opts, pulse)
    half = pulse.t_r / 2.0
    n_half = max(1, math.ceil(half / opts.max_step))
    dt_r = half / n_half
    midpoints = (np.arange(n_half) + 0.5) * dt_r
    up = _step_unitaries(sys.hamiltonian(flux_at(pulse, midpoints)), dt_r)
    segments: list[tuple[np.ndarray, float, int]] = [(up, dt_r, 1)]
    if pulse.t_p > 0:
        n_p = max(1, math.ceil(pulse.t_p / opts.plateau_step))
        dt_p = pulse.t_p / n_p
        plat = _step_unitaries(sys.hamiltonian(math.pi + pulse.delta_phi)[None], dt_p)
        segments.append((plat, dt_p, n_p))
    segments.append((up[::-1], dt_r, 1))
    return segments


def _t1_pair_ns(t1_us) -> tuple[float, float]:
    if t1_us is None:
        return math.inf, math.inf
    if np.isscalar(t1_us):
        t1_us = (t1_us, t1_us)
    t1_a, t1_b = t1_us
    pair = []
    for t1 in (t1_a, t1_b):
        if t1 is None or t1 == math.inf:
            pair.append(math.inf)
        elif t1 > 0:
            pair.append(float(t1) * 1e3)
        else:
            raise ValueError("relaxation times must be positive")
    return pair[0], pair[1]


def _damping_kraus(
    sys: TwoQubitSystem, dt: float, t1_ns: tuple[float, float], rate_factor: float
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Exact amplitude-damping Kraus pairs for one step of duration dt.

    The collapse operator |0><1|/sqrt(T1) of each qubit acts on the
    single-qubit sweet-spot levels embedded in the product basis; the two
    qubits' dissipators commute, so applying the pairs sequentially is exact.
    """
    n = sys.qubit_a.n_levels
    eye = np.eye(n, dtype=complex)
    pairs = []
    for t1, embed in (
        (t1_ns[0], lambda k: np.kron(k, eye)),
        (t1_ns[1], lambda k: np.kron(eye, k)),
    ):
        if math.isinf(t1):
            continue
        p = 1.0 - math.exp(-rate_factor * dt / t1)
        k0 = eye.copy()
        k0[1, 1] = math.sqrt(1.0 - p)
        k1 = np.zeros((n, n), dtype=complex)
        k1[0, 1] = math.sqrt(p)
        pairs.append((embed(k0), embed(k1)))
    return pairs


def _apply_kraus(rhos: np.ndarray, pairs) -> np.ndarray:
    for k0, k1 in pairs:
        rhos = k0 @ rhos @ k0.conj().T + k1 @ rhos @ k1.conj().T
    return rhos


def _evolve_density_batch(
    sys: TwoQubitSystem,
    pulse: PulseParams,
    t1_ns: tuple[float, float],
    rhos: np.ndarray,
    opts: IntegratorOptions,
    rate_factor: float,
) -> np.ndarray:
    """Strang-split evolution of a (m, dim, dim) stack of density matrices."""
    rhos = np.array(rhos, dtype=complex)
    dissipative = not all(math.isinf(t) for t in t1_ns)
    for steps, dt, reps in _pulse_step_sequence(sys, pulse, opts):
        half = _damping_kraus(sys, dt / 2.0, t1_ns, rate_factor) if dissipative else []
        seq = steps if reps == 1 else [steps[0]] * reps
        for u in seq:
            if half:
                rhos = _apply_kraus(rhos, half)
            rhos = u @ rhos @ u.conj().T
            if half:
                rhos = _apply_kraus(rhos, half)
    return rhos


def _lindblad_rk(
    sys: TwoQubitSystem,
    pulse: PulseParams,
    t1_ns: tuple[float, float],
    rho0: np.ndarray,
    opts: IntegratorOptions,
    rate_factor: float,
) -> np.ndarray:
    dim = sys.dim
    n = sys.qubit_a.n_levels
    eye = np.eye(n, dtype=complex)
    collapse = []
    for t1, embed in ((t1_ns[0], lambda k: np.kron(k, eye)), (t1_ns[1], lambda k: np.kron(eye, k))):
        if math.isinf(t1):
            continue
        c = np.zeros((n, n), dtype=complex)
        c[0, 1] = 1.0
        collapse.append((rate_factor / t1, embed(c)))

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        h = sys.hamiltonian(flux_at(pulse, float(t)))
        drho = (-1j * TWO_PI) * (h @ rho - rho @ h)
        for gamma, c in collapse:
            cd_c = c.conj().T @ c
            drho = drho + gamma * (
                c @ rho @ c.conj().T - 0.5 * (cd_c @ rho + rho @ cd_c)
            )
        return drho.reshape(-1)

    sol = solve_ivp(
        rhs,
        (0.0, pulse.duration),
        np.asarray(rho0, dtype=complex).reshape(-1),
        method="DOP853",
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
    )
    if not sol.success:
        raise NumericalError(f"adaptive-rk master equation failed: {sol.message}")
    return sol.y[:, -1].reshape(dim, dim)


def propagate_lindblad(
    sys: TwoQubitSystem,
    pulse: PulseParams,
    t1_us,
    rho0: np.ndarray,
    opts: IntegratorOptions = IntegratorOptions(),
    convention: str = "standard",
) -> np.ndarray:
    """Evolve a density matrix through the pulse with qubit relaxation.

    ``t1_us`` is a single relaxation time or a per-qubit (T1_A, T1_B) pair in
    microseconds; None or inf disables a channel.  ``convention`` selects the
    dissipator normalization: "standard" gives the excited state a lifetime of
    exactly T1; "literal" doubles the dissipator (the convention in which the
    collapse terms carry an explicit factor 2), i.e. a lifetime of T1/2.
    """
    if convention not in DISSIPATOR_CONVENTIONS:
        raise ValueError(f"unknown dissipator convention {convention!r}")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (sys.dim, sys.dim):
        raise ValueError(f"rho0 must be {sys.dim}x{sys.dim}")
    if np.abs(rho0 - rho0.conj().T).max() > 1e-9:
        raise ValueError("rho0 must be Hermitian")
    if abs(np.trace(rho0).real - 1.0) > 1e-9:
        raise ValueError("rho0 must have unit trace")
    rate_factor = 1.0 if convention == "standard" else 2.0
    t1_ns = _t1_pair_ns(t1_us)
    if opts.method == "adaptive-rk":
        rho = _lindblad_rk(sys, pulse, t1_ns, rho0, opts, rate_factor)
    else:
        rho = _evolve_density_batch(sys, pulse, t1_ns, rho0[None], opts, rate_factor)[0]
    drift = abs(np.trace(rho).real - 1.0)
    if drift > TRACE_TOL:
        raise NumericalError(f"trace drift {drift:.2e} exceeds {TRACE_TOL}")
    return rho


class LindbladChannel:
    """The pulse's open-system quantum channel on the computational subspace.

    Step unitaries are built once at construction; each application embeds a
    4x4 operator into the dressed computational subspace, evolves it under the
    master equation, and projects back.  The map is linear, so it may be
    applied to non-Hermitian operator-basis elements.
    """

    def __init__(
        self,
        sys: TwoQubitSystem,
        pulse: PulseParams,
        t1_us,
        opts: IntegratorOptions = IntegratorOptions(),
        convention: str = "standard",
    ):
        if convention not in DISSIPATOR_CONVENTIONS:
            raise ValueError(f"unknown dissipator convention {convention!r}")
        self.sys = sys
        self.pulse = pulse
        self.opts = opts
        self.rate_factor = 1.0 if convention == "standard" else 2.0
        self.t1_ns = _t1_pair_ns(t1_us)
        self.comp = sys.computational_states

    def apply_batch(self, ops: np.ndarray) -> np.ndarray:
        ops = np.asarray(ops, dtype=complex)
        embedded = np.einsum("di,kij,ej->kde", self.comp, ops, self.comp.conj())
        evolved = _evolve_density_batch(
            self.sys, self.pulse, self.t1_ns, embedded, self.opts, self.rate_factor
        )
        return np.einsum("dk,mde,el->mkl", self.comp.conj(), evolved, self.comp)

    def __call__(self, op: np.ndarray) -> np.ndarray:
        return self.apply_batch(np.asarray(op, dtype=complex)[None])[0]


def process_tomography(channel) -> ChiMatrix:
    """Reconstruct the chi matrix of a channel on the 4-dim subspace.

    The channel is applied to the complete operator basis of matrix units
    |i><j| (valid by linearity), assembled into a superoperator, and expanded
    in the two-qubit Pauli basis.  The chi matrix of a unitary V is the rank-1
    outer product of V's Pauli expansion coefficients.
    """
    units = np.zeros((16, 4, 4), dtype=complex)
    for i in range(4):
        for j in range(4):
            units[4 * i + j, i, j] = 1.0
    if hasattr(channel, "apply_batch"):
        outs = channel.apply_batch(units)
    else:
        outs = np.array([channel(u) for u in units])
    for i in range(4):
        out = outs[4 * i + i]
        if np.abs(out - out.conj().T).max() > 1e-9:
            raise NumericalError(
                "channel output is non-Hermitian beyond 1e-9 on a Hermitian input"
            )
    superop = outs.reshape(16, 16).T  # column (4i+j) = vec of E(|i><j|), row-major
    chi = np.empty((16, 16), dtype=complex)
    for m in range(16):
        for n in range(16):
            basis = np.kron(PAULI_2Q[m], PAULI_2Q[n].T)
            chi[m, n] = np.vdot(basis, superop) / 16.0
    return ChiMatrix(matrix=chi)


def chi_of_unitary(u4: np.ndarray) -> ChiMatrix:
    """Rank-1 chi matrix of a 4x4 unitary from its Pauli expansion."""
    coeff = np.array([np.trace(p.conj().T @ u4) / 4.0 for p in PAULI_2Q])
    return ChiMatrix(matrix=np.outer(coeff, coeff.conj()))


def unitary_channel(u4: np.ndarray):
    """Wrap a 4x4 matrix as a channel rho -> U rho U+ (for tests/tomography)."""

    def channel(rho: np.ndarray) -> np.ndarray:
        return u4 @ rho @ u4.conj().T

    return channel


# ---------------------------------------------------------------------------
# Instantaneous-basis trajectories
# ---------------------------------------------------------------------------


def instantaneous_trajectory(
    sys: TwoQubitSystem,
    pulse: PulseParams,
    psi0: np.ndarray,
    dt_out: float = 0.02,
    opts: IntegratorOptions = IntegratorOptions(),
) -> list[TrajectoryPoint]:
    """Track a state in the instantaneous {|01>_phi, |10>_phi} basis.

    At each output time the Hamiltonian at the instantaneous flux is
    diagonalized, the single-excitation doublet is followed by continuity
    (overlap with the previously tracked pair, phases fixed to be continuous),
    and the state's populations and Bloch vector in that pair are recorded.
    """
    _check_step(opts, pulse)
    psi0 = np.asarray(psi0, dtype=complex)
    t_out = np.arange(0.0, pulse.duration, dt_out)
    if t_out[-1] < pulse.duration:
        t_out = np.append(t_out, pulse.duration)

    # fine midpoint grid, sliced per output interval
    spans = np.diff(t_out)
    n_sub = np.maximum(1, np.ceil(spans / opts.max_step).astype(int))
    mids = np.concatenate(
        [t0 + (np.arange(k) + 0.5) * (dt / k) for t0, dt, k in zip(t_out[:-1], spans, n_sub)]
    )
    sub_dt = np.repeat(spans / n_sub, n_sub)
    w, v = np.linalg.eigh(sys.hamiltonian(flux_at(pulse, mids)))
    phases = np.exp(-1j * TWO_PI * w * sub_dt[:, None])
    steps = (v * phases[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2))

    # instantaneous eigenbases at the output times
    w_out, v_out = np.linalg.eigh(sys.hamiltonian(flux_at(pulse, t_out)))

    pair_prev = sys.eigvecs_pi[:, [sys.labels_pi[(0, 1)], sys.labels_pi[(1, 0)]]]
    psi = psi0.copy()
    points: list[TrajectoryPoint] = []
    warned = False
    step_idx = 0
    for k, t in enumerate(t_out):
        if k > 0:
            for _ in range(n_sub[k - 1]):
                psi = steps[step_idx] @ psi
                step_idx += 1
        ov = np.abs(pair_prev.conj().T @ v_out[k]) ** 2
        _, cols = linear_sum_assignment(-ov)
        pair = v_out[k][:, cols].copy()
        inner = np.sum(pair_prev.conj() * pair, axis=0)
        pair *= np.where(np.abs(inner) > 0, np.conj(inner) / np.abs(inner), 1.0)
        pair_prev = pair
        c01, c10 = pair.conj().T @ psi
        p01, p10 = abs(c01) ** 2, abs(c10) ** 2
        residual = 1.0 - p01 - p10
        if residual > 0.01 and not warned:
            warnings.warn(
                f"residual population {residual:.3f} outside the instantaneous "
                "two-state subspace; the two-level picture is breaking down",
                stacklevel=2,
            )
            warned = True
        cross = np.conj(c01) * c10
        points.append(
            TrajectoryPoint(
                t=float(t),
                pop_01=p01,
                pop_10=p10,
                bloch_x=2.0 * cross.real,
                bloch_y=2.0 * cross.imag,
                bloch_z=p01 - p10,
                residual=residual,
            )
        )
    return points


def write_trajectory_csv(path, points: list[TrajectoryPoint]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_ns", "pop01", "pop10", "bloch_x", "bloch_y", "bloch_z", "residual"])
        for p in points:
            writer.writerow(
                f"{x:.17g}"
                for x in (p.t, p.pop_01, p.pop_10, p.bloch_x, p.bloch_y, p.bloch_z, p.residual)
            )


def complex_matrix_to_json(m: np.ndarray) -> dict:
    """Complex matrix as {"shape", "data"} with row-major [re, im] pairs."""
    m = np.asarray(m)
    return {
        "shape": list(m.shape),
        "data": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def complex_matrix_from_json(obj: dict) -> np.ndarray:
    data = np.array([complex(re, im) for re, im in obj["data"]])
    return data.reshape(obj["shape"])


def export_propagator_json(path, result: PropagatorResult) -> None:
    payload = {
        "u_full": complex_matrix_to_json(result.u_full),
        "u_sim": complex_matrix_to_json(result.u_sim),
        "leakage_per_state": [float(x) for x in result.leakage_per_state],
        "unitarity_defect": result.unitarity_defect,
        "convergence_drift": result.convergence_drift,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def export_chi_json(path, chi: ChiMatrix) -> None:
    payload = {
        "pauli_labels": list(PAULI_LABELS),
        "chi": complex_matrix_to_json(chi.matrix),
        "trace": chi.trace,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
