import math

import pytest

from fluxgate import PulseParams, assemble
from fluxgate.config import default_config


@pytest.fixture(scope="session")
def system():
    """Reference two-qubit system (the hardware parameter set, 40/5 basis)."""
    return default_config().build_system()


@pytest.fixture(scope="session")
def uncoupled_system(system):
    """Same qubits with the capacitive coupling switched off."""
    return assemble(system.qubit_a, system.qubit_b, 0.0)


#: High-fidelity working points (t_p ns, delta_phi / pi) at t_r = 7.05 ns,
#: A = 16.741; all exceed 99.9999% coherent fidelity.
WORKING_POINTS = {
    "a": (25.85, 0.0705),
    "b": (7.30, 0.0705),
    "c": (12.05, 0.0674),
    "d": (9.00, 0.07482),
    "e": (6.95, 0.0723),
}


def point_pulse(name: str) -> PulseParams:
    t_p, dphi = WORKING_POINTS[name]
    return PulseParams(t_r=7.05, t_p=t_p, a_env=16.741, delta_phi=dphi * math.pi)


@pytest.fixture(scope="session")
def pulse_b():
    return point_pulse("b")
