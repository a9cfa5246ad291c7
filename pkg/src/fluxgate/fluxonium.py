"""Single-fluxonium circuit model.

A fluxonium is described by

    H = 4 E_C n^2 + (1/2) E_L phi^2 - E_J cos(phi_op - phi_ext),

with the charge operator n and flux operator phi satisfying [phi, n] = i.
The Hamiltonian is represented in the harmonic-oscillator eigenbasis of the
E_J = 0 circuit, diagonalized at a chosen external flux, and truncated to a
few-level qubit carrying the matrix elements of n, cos(phi), and sin(phi)
needed to assemble coupled-circuit Hamiltonians and flux-drive terms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalError

DEFAULT_OSC_DIM = 40
DEFAULT_N_LEVELS = 5

#: Relative eigenvalue spacing below which two levels are treated as degenerate.
DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True)
class CircuitParams:
    """Circuit energies of one fluxonium, as E/h in GHz.

    Parameters
    ----------
    e_c : float
        Charging energy.
    e_l : float
        Inductive energy of the superinductor.
    e_j : float
        Josephson energy of the small junction.
    phi_ext : float
        External reduced flux in radians; pi is the sweet spot.
    """

    e_c: float
    e_l: float
    e_j: float
    phi_ext: float = math.pi

    def __post_init__(self) -> None:
        if not (self.e_c > 0 and self.e_l > 0):
            raise ValueError("e_c and e_l must be positive")
        if self.e_j < 0:
            raise ValueError("e_j must be non-negative")
        if not math.isfinite(self.phi_ext):
            raise ValueError("phi_ext must be finite")


@dataclass(frozen=True)
class OscillatorRep:
    """Operators of one circuit in its E_J = 0 harmonic-oscillator basis.

    ``phi_op`` is real symmetric, ``n_op`` purely imaginary antisymmetric
    (both Hermitian), and ``cos_op``/``sin_op`` are exact matrix functions
    of ``phi_op`` obtained from its eigendecomposition.
    """

    dim: int
    phi_op: np.ndarray
    n_op: np.ndarray
    cos_op: np.ndarray
    sin_op: np.ndarray


@dataclass(frozen=True)
class TruncatedQubit:
    """A fluxonium truncated to its lowest eigenstates at a reference flux.

    ``energies`` are referenced to the ground state; ``n_elems``,
    ``cos_elems`` and ``sin_elems`` are the operator blocks in the truncated
    eigenbasis.  ``params.phi_ext`` records the flux at which the eigenbasis
    was taken (pi for the sweet-spot basis used by the gate pipeline).
    """

    n_levels: int
    energies: np.ndarray
    n_elems: np.ndarray
    cos_elems: np.ndarray
    sin_elems: np.ndarray
    params: CircuitParams

    @property
    def omega(self) -> float:
        """Qubit transition frequency E1 - E0 in GHz."""
        return float(self.energies[1] - self.energies[0])


def build_oscillator_rep(params: CircuitParams, dim: int = DEFAULT_OSC_DIM) -> OscillatorRep:
    """Construct flux/charge/cos/sin operators in the E_J = 0 oscillator basis.

    The zero-point amplitudes phi_zpf = (2 E_C / E_L)^(1/4) and
    n_zpf = (E_L / 32 E_C)^(1/4) follow from the canonical commutator and the
    oscillator frequency sqrt(8 E_C E_L).

    Parameters
    ----------
    params : CircuitParams
    dim : int
        Number of oscillator levels, at least 10.
    """
    if dim < 10:
        raise ValueError(f"oscillator basis needs dim >= 10, got {dim}")
    phi_zpf = (2.0 * params.e_c / params.e_l) ** 0.25
    n_zpf = (params.e_l / (32.0 * params.e_c)) ** 0.25
    lower = np.diag(np.sqrt(np.arange(1, dim)), 1)
    phi_op = phi_zpf * (lower + lower.T)
    n_op = 1j * n_zpf * (lower.T - lower)
    # cos/sin as exact matrix functions; Taylor series would diverge for
    # phi_zpf of order one.
    w, v = np.linalg.eigh(phi_op)
    cos_op = (v * np.cos(w)) @ v.T
    sin_op = (v * np.sin(w)) @ v.T
    return OscillatorRep(dim=dim, phi_op=phi_op, n_op=n_op, cos_op=cos_op, sin_op=sin_op)


def hamiltonian_at_flux(rep: OscillatorRep, params: CircuitParams, phi: float) -> np.ndarray:
    """Fluxonium Hamiltonian at external flux ``phi``, in GHz (E/h).

    Uses the expansion cos(phi_op - phi) = cos(phi_op) cos(phi)
    + sin(phi_op) sin(phi), so the returned matrix is real symmetric.
    """
    if rep.phi_op.shape != (rep.dim, rep.dim):
        raise ValueError("oscillator representation has inconsistent dimensions")
    kinetic = 4.0 * params.e_c * (rep.n_op @ rep.n_op).real
    inductive = 0.5 * params.e_l * (rep.phi_op @ rep.phi_op)
    junction = params.e_j * (math.cos(phi) * rep.cos_op + math.sin(phi) * rep.sin_op)
    return kinetic + inductive - junction


def _fix_eigenvector_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real and positive.

    Ties are broken by argmax's lowest-index rule, giving deterministic
    matrix elements across runs and basis sizes.
    """
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    return vecs / (lead / np.abs(lead))


def diagonalize_and_truncate(
    rep: OscillatorRep,
    params: CircuitParams,
    phi: float,
    n_levels: int = DEFAULT_N_LEVELS,
) -> TruncatedQubit:
    """Diagonalize the fluxonium at flux ``phi`` and keep the lowest levels.

    Energies are referenced to the ground state.  The blocks of n, cos(phi),
    sin(phi) are rotated into the truncated eigenbasis with a deterministic
    eigenvector phase convention.
    """
    if n_levels <= 0:
        raise ValueError("n_levels must be positive")
    if n_levels > rep.dim // 3:
        raise ValueError(
            f"n_levels={n_levels} exceeds the truncation safety margin dim/3={rep.dim // 3}"
        )
    h = hamiltonian_at_flux(rep, params, phi)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(
            f"eigensolver failed for fluxonium at phi={phi}: {exc}; "
            f"matrix norm {np.abs(h).max():.3e}, dim {rep.dim}"
        ) from exc
    scale = max(abs(w[0]), abs(w[n_levels]))
    gaps = np.diff(w[: n_levels + 1])
    if np.any(gaps < DEGENERACY_RTOL * scale):
        warnings.warn(
            "degenerate fluxonium eigenvalues encountered; ordering within the "
            "degenerate block is convention-dependent",
            stacklevel=2,
        )
    vecs = _fix_eigenvector_phases(v[:, :n_levels])
    return TruncatedQubit(
        n_levels=n_levels,
        energies=w[:n_levels] - w[0],
        n_elems=vecs.conj().T @ rep.n_op @ vecs,
        cos_elems=vecs.conj().T @ rep.cos_op @ vecs,
        sin_elems=vecs.conj().T @ rep.sin_op @ vecs,
        params=replace(params, phi_ext=phi),
    )


def qubit_frequency(params: CircuitParams, phi: float, dim: int = DEFAULT_OSC_DIM) -> float:
    """Transition frequency E1 - E0 in GHz at external flux ``phi``."""
    rep = build_oscillator_rep(params, dim)
    w = np.linalg.eigvalsh(hamiltonian_at_flux(rep, params, phi))
    return float(w[1] - w[0])
