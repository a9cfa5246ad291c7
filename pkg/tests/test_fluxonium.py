import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxgate import (
    CircuitParams,
    build_oscillator_rep,
    diagonalize_and_truncate,
    hamiltonian_at_flux,
    qubit_frequency,
)

QUBIT_A = CircuitParams(e_c=1.5, e_l=1.0, e_j=3.8)
QUBIT_B = CircuitParams(e_c=0.9, e_l=1.0, e_j=3.0)


def test_zero_point_amplitudes_product():
    # phi_zpf * n_zpf = 1/2 is forced by [phi, n] = i
    for e_c, e_l in [(1.0, 1.0), (1.5, 1.0), (0.9, 2.3)]:
        phi_zpf = (2 * e_c / e_l) ** 0.25
        n_zpf = (e_l / (32 * e_c)) ** 0.25
        assert abs(phi_zpf * n_zpf - 0.5) < 1e-14


def test_commutator_block():
    rep = build_oscillator_rep(QUBIT_A, dim=40)
    comm = rep.phi_op @ rep.n_op - rep.n_op @ rep.phi_op
    block = comm[:20, :20] - 1j * np.eye(20)
    assert np.abs(block).max() < 1e-9


def test_operators_hermitian():
    rep = build_oscillator_rep(QUBIT_B, dim=40)
    for op in (rep.phi_op, rep.n_op, rep.cos_op, rep.sin_op):
        assert np.abs(op - op.conj().T).max() < 1e-12
    h = hamiltonian_at_flux(rep, QUBIT_B, 1.1 * math.pi)
    assert np.abs(h - h.conj().T).max() < 1e-12


def test_harmonic_limit_equal_spacing():
    params = CircuitParams(e_c=1.3, e_l=0.7, e_j=0.0)
    rep = build_oscillator_rep(params, dim=30)
    w = np.linalg.eigvalsh(hamiltonian_at_flux(rep, params, math.pi))
    spacing = np.diff(w[:10])
    assert np.abs(spacing - math.sqrt(8 * 1.3 * 0.7)).max() < 1e-8


def test_cos_sin_pythagorean_identity():
    rep = build_oscillator_rep(QUBIT_A, dim=30)
    ident = rep.cos_op @ rep.cos_op + rep.sin_op @ rep.sin_op
    # exact matrix functions of one operator satisfy the identity everywhere
    assert np.abs(ident - np.eye(30)).max() < 1e-12


def test_cos_low_block_converged_vs_larger_basis():
    dim = 30
    small = build_oscillator_rep(QUBIT_A, dim=dim)
    large = build_oscillator_rep(QUBIT_A, dim=2 * dim)
    half = dim // 2
    for attr in ("cos_op", "sin_op"):
        a = getattr(small, attr)[:half, :half]
        b = getattr(large, attr)[:half, :half]
        assert np.abs(a - b).max() < 1e-8


def test_reference_transition_frequencies():
    # hardware parameter set: 1.152 GHz and 0.848 GHz at the sweet spot
    assert abs(qubit_frequency(QUBIT_A, math.pi) - 1.152) < 1e-3
    assert abs(qubit_frequency(QUBIT_B, math.pi) - 0.848) < 1e-3


@settings(max_examples=20, deadline=None)
@given(eps=st.floats(min_value=1e-6, max_value=1.0))
def test_spectral_parity_about_sweet_spot(eps):
    rep = build_oscillator_rep(QUBIT_B, dim=30)
    w_plus = np.linalg.eigvalsh(hamiltonian_at_flux(rep, QUBIT_B, math.pi + eps))
    w_minus = np.linalg.eigvalsh(hamiltonian_at_flux(rep, QUBIT_B, math.pi - eps))
    assert np.abs(w_plus - w_minus).max() < 1e-10


def test_truncation_basics():
    rep = build_oscillator_rep(QUBIT_A, dim=40)
    q = diagonalize_and_truncate(rep, QUBIT_A, math.pi, n_levels=5)
    assert q.energies[0] == 0.0
    assert np.all(np.diff(q.energies) > 0)
    assert q.omega > 0
    for block in (q.n_elems, q.cos_elems, q.sin_elems):
        assert np.abs(block - block.conj().T).max() < 1e-12
    assert q.params.phi_ext == math.pi


def test_phase_convention_deterministic_across_basis_size():
    q40 = diagonalize_and_truncate(build_oscillator_rep(QUBIT_B, 40), QUBIT_B, math.pi, 5)
    q50 = diagonalize_and_truncate(build_oscillator_rep(QUBIT_B, 50), QUBIT_B, math.pi, 5)
    assert np.abs(q40.n_elems - q50.n_elems).max() < 1e-8
    assert np.abs(q40.sin_elems - q50.sin_elems).max() < 1e-8


def test_energy_convergence_in_oscillator_dim():
    # at the default basis size, ten more levels move the lowest five by < 1 kHz
    e40 = diagonalize_and_truncate(build_oscillator_rep(QUBIT_A, 40), QUBIT_A, math.pi, 5).energies
    e50 = diagonalize_and_truncate(build_oscillator_rep(QUBIT_A, 50), QUBIT_A, math.pi, 5).energies
    assert np.abs(e40 - e50).max() < 1e-6
    # the qubit transition itself is already sub-kHz converged at dim 30
    q30 = diagonalize_and_truncate(build_oscillator_rep(QUBIT_A, 30), QUBIT_A, math.pi, 5)
    assert abs(q30.omega - (e40[1] - e40[0])) < 1e-6


def test_sweet_spot_is_frequency_extremum():
    d = abs(qubit_frequency(QUBIT_A, math.pi + 1e-4) - qubit_frequency(QUBIT_A, math.pi - 1e-4))
    assert d < 1e-9


def test_invalid_arguments():
    with pytest.raises(ValueError):
        CircuitParams(e_c=-1.0, e_l=1.0, e_j=1.0)
    with pytest.raises(ValueError):
        CircuitParams(e_c=1.0, e_l=0.0, e_j=1.0)
    with pytest.raises(ValueError):
        CircuitParams(e_c=1.0, e_l=1.0, e_j=-0.1)
    with pytest.raises(ValueError):
        CircuitParams(e_c=1.0, e_l=1.0, e_j=1.0, phi_ext=math.nan)
    with pytest.raises(ValueError):
        build_oscillator_rep(QUBIT_A, dim=8)
    rep = build_oscillator_rep(QUBIT_A, dim=30)
    with pytest.raises(ValueError):
        diagonalize_and_truncate(rep, QUBIT_A, math.pi, n_levels=11)
    with pytest.raises(ValueError):
        diagonalize_and_truncate(rep, QUBIT_A, math.pi, n_levels=0)
