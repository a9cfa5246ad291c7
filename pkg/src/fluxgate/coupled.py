"""Two capacitively coupled fluxoniums in the sweet-spot product basis.

The drift Hamiltonian is H_A (x) I + I (x) H_B + J_C n_A (x) n_B with both
qubits truncated at their sweet spots.  Tuning qubit B's flux to
phi = pi + dphi enters exactly through two control blocks:

    H(phi) = H(pi) - E_JB (1 + cos phi) [I (x) cos_B] - E_JB sin phi [I (x) sin_B]

Eigenstates are labeled by maximum overlap with the noninteracting product
states, with continuity tracking available along flux ramps where instantaneous
overlaps alone would swap labels through the avoided crossing.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .errors import NoCrossingError
from .fluxonium import TruncatedQubit

#: Two candidate labels whose overlaps differ by less than this are ambiguous.
AMBIGUITY_TOL = 1e-3

Label = tuple[int, int]


@dataclass(frozen=True)
class DressedLabels:
    """Bijective assignment of product labels (k, l) to eigenstate indices."""

    index: dict[Label, int]
    overlap: dict[Label, float]

    def __getitem__(self, label: Label) -> int:
        return self.index[label]


@dataclass(frozen=True)
class TwoQubitSystem:
    """Coupled system: drift Hamiltonian, flux-control blocks, dressed basis.

    ``h_pi``, ``c_ctrl`` and ``s_ctrl`` are dim x dim blocks in the sweet-spot
    product basis; ``eigvals_pi``/``eigvecs_pi``/``labels_pi`` hold the dressed
    spectrum at phi = pi.  All arrays are treated as immutable.
    """

    qubit_a: TruncatedQubit
    qubit_b: TruncatedQubit
    j_c: float
    dim: int
    h_pi: np.ndarray
    c_ctrl: np.ndarray
    s_ctrl: np.ndarray
    eigvals_pi: np.ndarray
    eigvecs_pi: np.ndarray
    labels_pi: DressedLabels

    @property
    def e_j_b(self) -> float:
        return self.qubit_b.params.e_j

    def hamiltonian(self, phi: float | np.ndarray) -> np.ndarray:
        """H(phi); broadcasts over an array of fluxes to a (k, dim, dim) stack."""
        phi = np.asarray(phi, dtype=float)
        cos_amp = self.e_j_b * (1.0 + np.cos(phi))
        sin_amp = self.e_j_b * np.sin(phi)
        if phi.ndim == 0:
            return self.h_pi - cos_amp * self.c_ctrl - sin_amp * self.s_ctrl
        return (
            self.h_pi[None, :, :]
            - cos_amp[:, None, None] * self.c_ctrl
            - sin_amp[:, None, None] * self.s_ctrl
        )

    def product_index(self, label: Label) -> int:
        k, l = label
        return k * self.qubit_b.n_levels + l

    @property
    def computational_states(self) -> np.ndarray:
        """Dressed |00>, |01>, |10>, |11> at pi as columns of a (dim, 4) matrix."""
        cols = [self.labels_pi[lbl] for lbl in ((0, 0), (0, 1), (1, 0), (1, 1))]
        return self.eigvecs_pi[:, cols]

    @property
    def g_effective(self) -> complex:
        """Computational-subspace coupling J_C <0|n_A|1><0|n_B|1> in GHz."""
        return complex(self.j_c * self.qubit_a.n_elems[0, 1] * self.qubit_b.n_elems[0, 1])


@dataclass(frozen=True)
class TwoLevelModel:
    """Analytic two-level diagnostics of the single-excitation doublet.

    ``omega_phi`` and ``delta_phi`` are in GHz, ``a_phi`` and ``g`` are
    energies in GHz (E/h), ``theta_mix`` in radians, and ``lambda_amp`` is the
    admixture amplitude of the minority product state in the doublet ground
    eigenvector.
    """

    omega_phi: float
    a_phi: float
    g: complex
    delta_phi: float
    theta_mix: float
    lambda_amp: complex


def _assign_labels(
    states: np.ndarray,
    reference: np.ndarray,
    ref_labels: list[Label],
    warn_ambiguous: bool = False,
) -> DressedLabels:
    """Maximum-overlap bijection between reference states and eigenstates.

    Solved as a linear assignment on squared overlaps so the bijection is
    globally optimal; ambiguous assignments (two labels within AMBIGUITY_TOL
    of one state) emit a warning and are resolved by overlap magnitude then
    lower index, which is the assignment solver's deterministic choice.
    """
    ov = np.abs(reference.conj().T @ states) ** 2
    rows, cols = linear_sum_assignment(-ov)
    index: dict[Label, int] = {}
    overlap: dict[Label, float] = {}
    for r, c in zip(rows, cols):
        index[ref_labels[r]] = int(c)
        overlap[ref_labels[r]] = float(math.sqrt(ov[r, c]))
    if warn_ambiguous:
        for c in range(ov.shape[1]):
            claims = np.sort(ov[:, c])[::-1]
            if claims.size > 1 and abs(claims[0] - claims[1]) < AMBIGUITY_TOL**2:
                warnings.warn(
                    f"ambiguous dressed-state assignment for eigenstate {c}; "
                    "resolved by overlap magnitude then lower index",
                    stacklevel=3,
                )
    return DressedLabels(index=index, overlap=overlap)


def assemble(qubit_a: TruncatedQubit, qubit_b: TruncatedQubit, j_c: float) -> TwoQubitSystem:
    """Build the coupled system from two sweet-spot truncated qubits.

    Both qubits must be truncated at phi_ext = pi: the flux drive is wired to
    qubit B only, so a system "driven through qubit A" cannot be constructed.
    """
    for name, q in (("A", qubit_a), ("B", qubit_b)):
        if abs(q.params.phi_ext - math.pi) > 1e-12:
            raise ValueError(
                f"qubit {name} must be truncated at the sweet spot (phi_ext=pi), "
                f"got phi_ext={q.params.phi_ext}"
            )
    if qubit_a.n_levels != qubit_b.n_levels:
        raise ValueError("both qubits must be truncated to the same number of levels")
    n = qubit_a.n_levels
    eye = np.eye(n)
    h_pi = (
        np.kron(np.diag(qubit_a.energies), eye)
        + np.kron(eye, np.diag(qubit_b.energies))
        + j_c * np.kron(qubit_a.n_elems, qubit_b.n_elems)
    )
    if np.abs(h_pi.imag).max() > 1e-12:
        raise ValueError("drift Hamiltonian is not Hermitian-real; check qubit inputs")
    h_pi = h_pi.real
    c_ctrl = np.kron(eye, qubit_b.cos_elems.real)
    s_ctrl = np.kron(eye, qubit_b.sin_elems.real)
    w, v = np.linalg.eigh(h_pi)
    ref_labels = [(k, l) for k in range(n) for l in range(n)]
    labels = _assign_labels(v, np.eye(n * n), ref_labels)
    return TwoQubitSystem(
        qubit_a=qubit_a,
        qubit_b=qubit_b,
        j_c=j_c,
        dim=n * n,
        h_pi=h_pi,
        c_ctrl=c_ctrl,
        s_ctrl=s_ctrl,
        eigvals_pi=w,
        eigvecs_pi=v,
        labels_pi=labels,
    )


def dressed_spectrum(
    sys: TwoQubitSystem,
    phi: float,
    prev: tuple[np.ndarray, DressedLabels] | None = None,
) -> tuple[np.ndarray, np.ndarray, DressedLabels]:
    """Eigensystem of H(phi) with labeled states.

    Without ``prev``, labels are assigned by overlap with the noninteracting
    sweet-spot product states.  Passing the (states, labels) pair of a nearby
    flux point switches to continuity tracking, which keeps labels adiabatic
    through the avoided crossing.
    """
    w, v = np.linalg.eigh(sys.hamiltonian(phi))
    n = sys.qubit_a.n_levels
    ref_labels = [(k, l) for k in range(n) for l in range(n)]
    if prev is None:
        labels = _assign_labels(v, np.eye(sys.dim), ref_labels, warn_ambiguous=True)
    else:
        prev_states, prev_labels = prev
        order = sorted(prev_labels.index, key=prev_labels.index.get)
        ref = prev_states[:, [prev_labels.index[lbl] for lbl in order]]
        labels = _assign_labels(v, ref, order)
    return w, v, labels


def dressed_sweep(
    sys: TwoQubitSystem, phis: np.ndarray
) -> tuple[np.ndarray, list[Label]]:
    """Continuity-tracked dressed energies along a flux ramp.

    Returns an (n_phi, dim) array of energies, one column per label, plus the
    column label order.
    """
    phis = np.asarray(phis, dtype=float)
    n = sys.qubit_a.n_levels
    order = [(k, l) for k in range(n) for l in range(n)]
    energies = np.empty((phis.size, sys.dim))
    prev = None
    for i, phi in enumerate(phis):
        w, v, labels = dressed_spectrum(sys, phi, prev=prev)
        energies[i] = [w[labels[lbl]] for lbl in order]
        prev = (v, labels)
    return energies, order


def _single_excitation_gap(sys: TwoQubitSystem, phi: float) -> float:
    """Energy difference of the two dressed levels spanning |01> and |10>.

    The doublet is identified by total weight on the two single-excitation
    product states, which stays well-defined at the crossing where individual
    labels are ambiguous.
    """
    w, v = np.linalg.eigh(sys.hamiltonian(phi))
    i01 = sys.product_index((0, 1))
    i10 = sys.product_index((1, 0))
    weight = np.abs(v[i01, :]) ** 2 + np.abs(v[i10, :]) ** 2
    pair = np.sort(np.argsort(weight)[-2:])
    return float(w[pair[1]] - w[pair[0]])


def find_level_crossing(
    sys: TwoQubitSystem,
    window: tuple[float, float] = (math.pi, 1.5 * math.pi),
    xtol: float = 1e-6,
    coarse_points: int = 201,
) -> tuple[float, float]:
    """Locate the |01>-|10> avoided crossing inside the flux window.

    A coarse scan brackets the interior minimum of the doublet gap, then a
    golden-section search refines it to ``xtol`` radians.  Returns the
    detuning from pi and the minimal gap in GHz.
    """
    if sys.qubit_b.omega >= sys.qubit_a.omega:
        raise ValueError("crossing search expects qubit B to be the lower-frequency qubit")
    lo, hi = window
    grid = np.linspace(lo, hi, coarse_points)[1:-1]
    gaps = np.array([_single_excitation_gap(sys, p) for p in grid])
    k = int(np.argmin(gaps))
    if k == 0 or k == grid.size - 1:
        raise NoCrossingError(
            f"no interior gap minimum in ({lo / math.pi:.3f} pi, {hi / math.pi:.3f} pi)"
        )
    res = minimize_scalar(
        lambda p: _single_excitation_gap(sys, p),
        bracket=(grid[k - 1], grid[k], grid[k + 1]),
        method="golden",
        options={"xtol": xtol / grid[k]},
    )
    phi_star = float(res.x)
    return phi_star - math.pi, _single_excitation_gap(sys, phi_star)


def two_level_model(
    qubit_b: TruncatedQubit, omega_a: float, g: complex, phi: float
) -> TwoLevelModel:
    """Analytic two-level reduction of the single-excitation doublet at ``phi``.

    Uses the sweet-spot matrix elements of qubit B:

        omega_phi = omega_B - E_JB (1 + cos phi) (<1|cos|1> - <0|cos|0>)
        a_phi     = -2 E_JB sin phi <0|sin|1>
        Delta_phi = omega_A - sqrt(omega_phi^2 + a_phi^2)
        tan(theta_mix) = a_phi / omega_phi

    with all energies as E/h in GHz.  ``lambda_amp`` is the minority/majority
    amplitude ratio of the doublet ground eigenvector, i.e. the admixture
    coefficient in the expansion of one sweet-spot state over the
    instantaneous pair; its magnitude reaches 1 at the crossing.
    """
    e_j = qubit_b.params.e_j
    omega_b = qubit_b.omega
    d_cos = float((qubit_b.cos_elems[1, 1] - qubit_b.cos_elems[0, 0]).real)
    s01 = complex(qubit_b.sin_elems[0, 1])
    omega_phi = omega_b - e_j * (1.0 + math.cos(phi)) * d_cos
    a_phi = -2.0 * e_j * math.sin(phi) * s01.real
    delta_phi = omega_a - math.sqrt(omega_phi**2 + a_phi**2)
    theta_mix = math.atan2(a_phi, omega_phi)
    coupling = g * math.cos(theta_mix)
    h_red = np.array(
        [[-0.5 * delta_phi, coupling], [np.conj(coupling), 0.5 * delta_phi]],
        dtype=complex,
    )
    _, vecs = np.linalg.eigh(h_red)
    ground = vecs[:, 0]
    major = int(np.argmax(np.abs(ground)))
    lam = complex(ground[1 - major] / ground[major]) if abs(ground[major]) > 0 else 0.0
    return TwoLevelModel(
        omega_phi=omega_phi,
        a_phi=a_phi,
        g=complex(g),
        delta_phi=delta_phi,
        theta_mix=theta_mix,
        lambda_amp=lam,
    )


def static_zz(sys: TwoQubitSystem, phi: float) -> float:
    """ZZ diagnostic E11 - E10 - E01 + E00 at flux ``phi``, in GHz."""
    w, _, labels = dressed_spectrum(sys, phi)
    return float(
        w[labels[(1, 1)]] - w[labels[(1, 0)]] - w[labels[(0, 1)]] + w[labels[(0, 0)]]
    )


def write_spectrum_csv(path, phis: np.ndarray, sys: TwoQubitSystem) -> None:
    """Dump a continuity-tracked two-qubit spectrum sweep as CSV.

    Columns: phi_over_pi, then one energy column per labeled level in GHz.
    """
    energies, order = dressed_sweep(sys, phis)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phi_over_pi"] + [f"e_{k}{l}_ghz" for k, l in order])
        for phi, row in zip(phis, energies):
            writer.writerow([f"{phi / math.pi:.17g}"] + [f"{e:.17g}" for e in row])
