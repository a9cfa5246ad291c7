"""Ideal gate family, phase calibration, and fidelity measures.

The target family mixes |01> and |10> by an angle theta while the outer
states |00> and |11> accumulate a collective phase zeta:

    U(theta, zeta) = diag-block[ e^{-i zeta/2},
                                 [[cos(theta/2), -i sin(theta/2)],
                                  [-i sin(theta/2), cos(theta/2)]],
                                 e^{-i zeta/2} ].

zeta is invariant under single-qubit Z rotations and global phase, so it
selects the local-equivalence class; calibration removes the Z-rotation
freedom from a simulated operator in closed form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PhaseUndefinedError
from .evolution import ChiMatrix
from .units import TWO_PI

#: Diagonal magnitudes below this leave the element's phase undefined.
DIAG_PHASE_TOL = 1e-6

#: Off-structure weight above which calibration output is unreliable.
BLOCK_LEAK_TOL = 0.1

#: Single-qubit Pauli eigenstates; their 36 products form a product 2-design,
#: so averaging a degree-(2,2) quantity over them equals the Haar average.
_PAULI_EIGENSTATES = np.array(
    [
        [1.0, 0.0],
        [0.0, 1.0],
        [2**-0.5, 2**-0.5],
        [2**-0.5, -(2**-0.5)],
        [2**-0.5, 1j * 2**-0.5],
        [2**-0.5, -1j * 2**-0.5],
    ],
    dtype=complex,
)
_PRODUCT_STATES = np.array(
    [np.kron(a, b) for a in _PAULI_EIGENSTATES for b in _PAULI_EIGENSTATES]
)


@dataclass(frozen=True)
class IdealGateSpec:
    """Mixing angle theta and collective phase zeta, in radians."""

    theta: float
    zeta: float


@dataclass(frozen=True)
class CalibratedGate:
    """A simulated 4x4 operator with the Z-rotation freedom removed.

    ``z_angles`` holds (pre-A, pre-B, post-A, post-B, global) phases; ``beta``
    the diagonal phases of the raw input; ``zeta`` its collective phase.
    """

    u_prime: np.ndarray
    z_angles: np.ndarray
    beta: np.ndarray
    zeta: float


@dataclass(frozen=True)
class FidelityReport:
    """Gate-quality summary serialized by the CLI."""

    coherent_f: float
    leakage_total: float
    entangling_power: float
    zeta: float
    f_p: float | None = None
    f_g: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "coherent_f": self.coherent_f,
            "f_p": self.f_p,
            "f_g": self.f_g,
            "leakage_total": self.leakage_total,
            "entangling_power": self.entangling_power,
            "zeta_rad": self.zeta,
        }


def ideal_gate(spec: IdealGateSpec) -> np.ndarray:
    """Exact 4x4 matrix of the ideal gate family."""
    cos, sin = np.cos(spec.theta / 2.0), np.sin(spec.theta / 2.0)
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = u[3, 3] = np.exp(-1j * spec.zeta / 2.0)
    u[1, 1] = u[2, 2] = cos
    u[1, 2] = u[2, 1] = -1j * sin
    return u


def extract_zeta(u_sim: np.ndarray) -> float:
    """Collective phase zeta = -beta_00 - beta_11 + beta_01 + beta_10 in [0, 2 pi).

    beta_kl are the diagonal-element phases of the projected operator; the
    combination is invariant under pre/post single-qubit Z rotations and
    global phase.
    """
    diag = np.diagonal(u_sim)
    if np.any(np.abs(diag) <= DIAG_PHASE_TOL):
        raise PhaseUndefinedError(
            f"diagonal magnitudes {np.abs(diag)} leave the collective phase undefined"
        )
    beta = np.angle(diag)
    zeta = float((-beta[0] - beta[3] + beta[1] + beta[2]) % TWO_PI)
    if zeta > TWO_PI - 1e-9:  # roundoff below zero must not wrap to 2 pi
        zeta = 0.0
    return zeta


def _z_rotation(angle_a: float, angle_b: float) -> np.ndarray:
    """diag phases of exp(i angle_a n_A + i angle_b n_B) on (00, 01, 10, 11)."""
    return np.exp(1j * np.array([0.0, angle_b, angle_a, angle_a + angle_b]))


def block_leakage(u_sim: np.ndarray) -> float:
    """Weight of u_sim outside the excitation-preserving structure, per state."""
    mask = np.zeros((4, 4), dtype=bool)
    for i, j in ((0, 0), (1, 1), (1, 2), (2, 1), (2, 2), (3, 3)):
        mask[i, j] = True
    return float(np.sum(np.abs(u_sim[~mask]) ** 2) / 4.0)


def calibrate_z(u_sim: np.ndarray) -> CalibratedGate:
    """Remove single-qubit Z rotations and global phase in closed form.

    The calibrated operator u' satisfies arg<01|u'|01> = arg<10|u'|10> = 0,
    arg<00|u'|00> = arg<11|u'|11> = -zeta/2, and arg<01|u'|10> = -pi/2
    (the -i sin(theta/2) structure); unitarity then fixes the conjugate
    off-diagonal element.  Round-trips any ideal gate dressed by arbitrary Z
    rotations back to the exact ideal matrix.
    """
    u_sim = np.asarray(u_sim, dtype=complex)
    if block_leakage(u_sim) > BLOCK_LEAK_TOL:
        warnings.warn(
            "input is far from excitation-preserving; calibration is unreliable",
            stacklevel=2,
        )
    zeta = extract_zeta(u_sim)
    beta = np.angle(np.diagonal(u_sim))
    glob = -zeta / 2.0 - beta[0]
    a_sum = -beta[2] - glob
    b_sum = -beta[1] - glob
    if abs(u_sim[1, 2]) > DIAG_PHASE_TOL:
        swap_shift = -np.pi / 2.0 - glob - np.angle(u_sim[1, 2])
    else:
        swap_shift = 0.0  # theta ~ 0: no off-diagonal phase to fix
    pre_a = 0.0
    post_b = swap_shift - pre_a
    post_a = a_sum - pre_a
    pre_b = b_sum - post_b
    u_prime = (
        np.exp(1j * glob)
        * _z_rotation(post_a, post_b)[:, None]
        * u_sim
        * _z_rotation(pre_a, pre_b)[None, :]
    )
    return CalibratedGate(
        u_prime=u_prime,
        z_angles=np.array([pre_a, pre_b, post_a, post_b, glob]),
        beta=beta,
        zeta=zeta,
    )


def coherent_fidelity(u_prime: np.ndarray, zeta: float) -> float:
    """Average coherent gate fidelity against the ideal gate of phase zeta.

    F = [Tr(u'+ u') + |Tr(U_ideal(pi/2, zeta)+ u')|^2] / 20; the trace term
    accounts for leakage, so F(U, U) = 1 exactly for unitary input.
    """
    target = ideal_gate(IdealGateSpec(theta=np.pi / 2.0, zeta=zeta))
    trace_term = np.trace(u_prime.conj().T @ u_prime).real
    overlap = abs(np.trace(target.conj().T @ u_prime)) ** 2
    return float((trace_term + overlap) / 20.0)


def gate_fidelity_from_chi(chi_sim: ChiMatrix, chi_ideal: ChiMatrix) -> tuple[float, float]:
    """Process fidelity Tr(chi_ideal chi_sim) and gate fidelity [4 F_p + Tr chi_sim]/5."""
    f_p = float(np.trace(chi_ideal.matrix @ chi_sim.matrix).real)
    f_g = (4.0 * f_p + chi_sim.trace) / 5.0
    return f_p, f_g


def entangling_power(u: np.ndarray, atol: float = 1e-8) -> float:
    """Mean linear entropy generated from product states.

    Computed exactly by averaging 1 - Tr(rho_A^2) over the 36 products of
    single-qubit Pauli eigenstates (a product 2-design); CZ and iSWAP reach
    the two-qubit maximum 2/9, SWAP gives 0.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError("entangling power is defined for 4x4 unitaries")
    if np.abs(u.conj().T @ u - np.eye(4)).max() > atol:
        raise ValueError(f"input is not unitary within {atol}")
    amp = (_PRODUCT_STATES @ u.T).reshape(-1, 2, 2)
    rho_a = amp @ np.conj(np.swapaxes(amp, -1, -2))
    purity = np.sum(np.abs(rho_a) ** 2, axis=(1, 2))
    return float(np.mean(1.0 - purity))


def entangling_power_monte_carlo(u: np.ndarray, n_samples: int = 20000, seed: int = 0) -> float:
    """Haar Monte-Carlo estimate of the entangling power (test oracle)."""
    rng = np.random.default_rng(seed)
    shape = (n_samples, 2)
    states_a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    states_b = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    states_a /= np.linalg.norm(states_a, axis=1, keepdims=True)
    states_b /= np.linalg.norm(states_b, axis=1, keepdims=True)
    prod = np.einsum("ki,kj->kij", states_a, states_b).reshape(n_samples, 4)
    amp = (prod @ u.T).reshape(-1, 2, 2)
    rho_a = amp @ np.conj(np.swapaxes(amp, -1, -2))
    purity = np.sum(np.abs(rho_a) ** 2, axis=(1, 2))
    return float(np.mean(1.0 - purity))


def closest_unitary(m: np.ndarray) -> np.ndarray:
    """Polar-decomposition projection of a near-unitary matrix onto U(n)."""
    w, _, vh = np.linalg.svd(m)
    return w @ vh
