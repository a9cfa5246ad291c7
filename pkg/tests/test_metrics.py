import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxgate import (
    IdealGateSpec,
    PhaseUndefinedError,
    calibrate_z,
    chi_of_unitary,
    coherent_fidelity,
    entangling_power,
    extract_zeta,
    gate_fidelity_from_chi,
    ideal_gate,
)
from fluxgate.metrics import closest_unitary, entangling_power_monte_carlo
from fluxgate.units import TWO_PI

CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
ISWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def _random_unitary(rng, n=4):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def _random_z_layer(rng):
    pre = np.exp(1j * rng.uniform(0, TWO_PI, size=2))
    post = np.exp(1j * rng.uniform(0, TWO_PI, size=2))
    z_pre = np.diag([1.0, pre[1], pre[0], pre[0] * pre[1]])
    z_post = np.diag([1.0, post[1], post[0], post[0] * post[1]])
    glob = np.exp(1j * rng.uniform(0, TWO_PI))
    return z_pre, z_post, glob


def _angle_close(a, b, tol):
    return abs((a - b + math.pi) % TWO_PI - math.pi) < tol


def test_ideal_gate_special_cases():
    assert np.abs(ideal_gate(IdealGateSpec(0.0, 0.0)) - np.eye(4)).max() < 1e-15
    sqrt_iswap = ideal_gate(IdealGateSpec(math.pi / 2, 0.0))
    root = 1 / math.sqrt(2)
    expected = np.array(
        [[1, 0, 0, 0], [0, root, -1j * root, 0], [0, -1j * root, root, 0], [0, 0, 0, 1]]
    )
    assert np.abs(sqrt_iswap - expected).max() < 1e-15
    # SWAP class: mixing angle pi with collective phase pi, up to global -i
    swap_like = ideal_gate(IdealGateSpec(math.pi, math.pi))
    assert np.abs(swap_like - (-1j) * SWAP).max() < 1e-15


def test_extract_zeta_direct_substitution():
    u = np.diag([np.exp(1j * math.pi / 4), 1.0, 1.0, np.exp(1j * math.pi / 4)])
    assert _angle_close(extract_zeta(u), 3 * math.pi / 2, 1e-12)


@pytest.mark.parametrize("zeta", np.linspace(0.0, TWO_PI, 9, endpoint=False))
def test_extract_zeta_round_trip_on_ideal_gates(zeta):
    u = ideal_gate(IdealGateSpec(math.pi / 2, zeta))
    assert _angle_close(extract_zeta(u), zeta, 1e-12)


def test_extract_zeta_undefined_phase():
    u = ideal_gate(IdealGateSpec(math.pi, 0.3))  # cos(theta/2) = 0 on the diagonal
    with pytest.raises(PhaseUndefinedError):
        extract_zeta(u)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_zeta_invariant_under_z_rotations(seed):
    rng = np.random.default_rng(seed)
    u = _random_unitary(rng)
    if np.abs(np.diagonal(u)).min() < 1e-3:
        return  # phases ill-conditioned; not the property under test
    z_pre, z_post, glob = _random_z_layer(rng)
    assert _angle_close(extract_zeta(u), extract_zeta(glob * z_post @ u @ z_pre), 1e-12)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**31 - 1),
    theta=st.floats(min_value=0.05, max_value=3.0),
    zeta=st.floats(min_value=0.0, max_value=TWO_PI - 1e-9),
)
def test_calibration_round_trip(seed, theta, zeta):
    rng = np.random.default_rng(seed)
    target = ideal_gate(IdealGateSpec(theta, zeta))
    z_pre, z_post, glob = _random_z_layer(rng)
    cal = calibrate_z(glob * z_post @ target @ z_pre)
    assert np.abs(cal.u_prime - target).max() < 1e-10


def test_calibration_identity_and_idempotence():
    cal = calibrate_z(np.eye(4, dtype=complex))
    assert np.abs(cal.u_prime - np.eye(4)).max() < 1e-12
    assert np.abs(cal.z_angles).max() < 1e-12

    rng = np.random.default_rng(7)
    u = ideal_gate(IdealGateSpec(1.3, 0.8))
    z_pre, z_post, glob = _random_z_layer(rng)
    once = calibrate_z(glob * z_post @ u @ z_pre)
    twice = calibrate_z(once.u_prime)
    assert np.abs(twice.u_prime - once.u_prime).max() < 1e-12


def test_calibration_warns_on_block_leakage():
    u = np.eye(4, dtype=complex)
    u[0, 3] = u[3, 0] = 0.8  # grossly non-excitation-preserving
    with pytest.warns(UserWarning):
        calibrate_z(u)


def test_coherent_fidelity_exact_and_quadratic():
    zeta = 1.1
    u = ideal_gate(IdealGateSpec(math.pi / 2, zeta))
    assert abs(coherent_fidelity(u, zeta) - 1.0) < 1e-14
    errs = []
    for eps in (1e-3, 2e-3):
        u_eps = ideal_gate(IdealGateSpec(math.pi / 2 + eps, zeta))
        errs.append(1.0 - coherent_fidelity(u_eps, zeta))
    assert abs(errs[1] / errs[0] - 4.0) < 0.02  # 1 - F proportional to eps^2


def test_coherent_fidelity_uniform_leakage():
    zeta = 0.4
    u = ideal_gate(IdealGateSpec(math.pi / 2, zeta))
    p = 0.03
    assert abs(coherent_fidelity(math.sqrt(1 - p) * u, zeta) - (1 - p)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_fidelity_bounds_for_contractions(seed):
    rng = np.random.default_rng(seed)
    u = _random_unitary(rng)
    contraction = u * rng.uniform(0.0, 1.0)
    f = coherent_fidelity(contraction, rng.uniform(0, TWO_PI))
    assert -1e-12 <= f <= 1.0 + 1e-12


def test_entangling_power_reference_values():
    assert abs(entangling_power(CZ) - 2.0 / 9.0) < 1e-10
    assert abs(entangling_power(ISWAP) - 2.0 / 9.0) < 1e-10
    assert abs(entangling_power(SWAP)) < 1e-10
    for zeta in (0.0, math.pi / 2, math.pi, 3 * math.pi / 2):
        u = ideal_gate(IdealGateSpec(math.pi / 2, zeta))
        assert abs(entangling_power(u) - 1.0 / 6.0) < 1e-10


def test_entangling_power_rejects_non_unitary():
    with pytest.raises(ValueError):
        entangling_power(0.9 * CZ)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_entangling_power_local_invariance(seed):
    rng = np.random.default_rng(seed)
    u = _random_unitary(rng)
    locals_pre = np.kron(_random_unitary(rng, 2), _random_unitary(rng, 2))
    locals_post = np.kron(_random_unitary(rng, 2), _random_unitary(rng, 2))
    assert abs(entangling_power(locals_post @ u @ locals_pre) - entangling_power(u)) < 1e-10


def test_entangling_power_matches_haar_monte_carlo():
    u = ideal_gate(IdealGateSpec(math.pi / 2, 1.0))
    exact = entangling_power(u)
    mc = entangling_power_monte_carlo(u, n_samples=40000, seed=3)
    assert abs(exact - mc) < 3e-3


def test_gate_fidelity_from_chi_pure_unitary():
    chi = chi_of_unitary(CZ)
    f_p, f_g = gate_fidelity_from_chi(chi, chi)
    assert abs(f_p - 1.0) < 1e-12
    assert abs(f_g - 1.0) < 1e-12


def test_gate_fidelity_consistent_with_coherent_fidelity():
    # trace-preserving unitary channel: F_g from chi equals the coherent formula
    zeta = 0.9
    u_prime = ideal_gate(IdealGateSpec(math.pi / 2 + 0.01, zeta))
    chi_sim = chi_of_unitary(u_prime)
    chi_id = chi_of_unitary(ideal_gate(IdealGateSpec(math.pi / 2, zeta)))
    _, f_g = gate_fidelity_from_chi(chi_sim, chi_id)
    assert abs(f_g - coherent_fidelity(u_prime, zeta)) < 1e-8


def test_closest_unitary_projection():
    rng = np.random.default_rng(11)
    u = _random_unitary(rng)
    near = u + 1e-6 * rng.normal(size=(4, 4))
    w = closest_unitary(near)
    assert np.abs(w.conj().T @ w - np.eye(4)).max() < 1e-12
    assert np.abs(w - u).max() < 1e-5
