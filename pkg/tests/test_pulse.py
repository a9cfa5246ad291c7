import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxgate import PulseParams, flux_at, sample, validate_adiabaticity

PULSE = PulseParams(t_r=7.05, t_p=7.30, a_env=16.741, delta_phi=0.0705 * math.pi)


def test_edges_return_to_sweet_spot():
    assert flux_at(PULSE, 0.0) == math.pi
    assert flux_at(PULSE, PULSE.duration) == math.pi


def test_ramp_meets_plateau_exactly():
    # the normalization C forces the ramp value at t_r/2 to equal pi+delta_phi
    top = math.pi + PULSE.delta_phi
    assert abs(flux_at(PULSE, PULSE.t_r / 2) - top) < 1e-15
    for eps in (1e-7, -1e-7):
        assert abs(flux_at(PULSE, PULSE.t_r / 2 + eps) - top) < 1e-14
        assert abs(flux_at(PULSE, PULSE.t_r / 2 + PULSE.t_p + eps) - top) < 1e-14


def test_quarter_ramp_regression_value():
    # evaluated once from the closed form and frozen
    assert abs(flux_at(PULSE, PULSE.t_r / 4) - 3.2171634527304565) < 1e-12


@settings(max_examples=60, deadline=None)
@given(t=st.floats(min_value=0.0, max_value=PULSE.duration))
def test_pulse_time_symmetry(t):
    assert abs(flux_at(PULSE, t) - flux_at(PULSE, PULSE.duration - t)) < 1e-12


def test_monotonic_ramp_up():
    t = np.linspace(0.0, PULSE.t_r / 2, 400)
    vals = flux_at(PULSE, t)
    assert np.all(np.diff(vals) > 0)


def test_peak_is_plateau_value():
    t = np.linspace(0.0, PULSE.duration, 4001)
    vals = flux_at(PULSE, t)
    assert vals.max() == math.pi + PULSE.delta_phi
    on_plateau = (t >= PULSE.t_r / 2) & (t <= PULSE.t_r / 2 + PULSE.t_p)
    assert np.all(vals[on_plateau] == math.pi + PULSE.delta_phi)


def test_negative_detuning_mirrors():
    neg = PulseParams(t_r=7.05, t_p=7.30, a_env=16.741, delta_phi=-0.0705 * math.pi)
    t = np.linspace(0.0, neg.duration, 101)
    assert np.abs((flux_at(neg, t) - math.pi) + (flux_at(PULSE, t) - math.pi)).max() < 1e-12


def test_out_of_range_idles_at_pi():
    assert flux_at(PULSE, -1.0) == math.pi
    assert flux_at(PULSE, PULSE.duration + 5.0) == math.pi
    with pytest.raises(ValueError):
        flux_at(PULSE, -1.0, strict=True)


def test_parameter_validation():
    with pytest.raises(ValueError):
        PulseParams(t_r=0.0, t_p=1.0, a_env=10.0, delta_phi=0.1)
    with pytest.raises(ValueError):
        PulseParams(t_r=1.0, t_p=-1.0, a_env=10.0, delta_phi=0.1)
    with pytest.raises(ValueError):
        PulseParams(t_r=1.0, t_p=1.0, a_env=0.0, delta_phi=0.1)


def test_adiabaticity_reference_point_is_loose():
    # 2 pi g ~ 0.082 < 1/7.05 ~ 0.142 < 2 pi 0.848; the left margin is < 3x
    report = validate_adiabaticity(PULSE, g=0.013, omega_min=0.848)
    assert report.status == "loose"
    assert report.passed
    assert report.coupling_rate < report.ramp_rate < report.omega_rate


def test_adiabaticity_strict_and_fail():
    assert validate_adiabaticity(
        PulseParams(t_r=10.0, t_p=0.0, a_env=10.0, delta_phi=0.1), g=0.004, omega_min=1.0
    ).status == "strict"
    slow = PulseParams(t_r=1e6, t_p=0.0, a_env=10.0, delta_phi=0.1)
    assert validate_adiabaticity(slow, g=0.013, omega_min=0.848).status == "fail"
    fast = PulseParams(t_r=1e-3, t_p=0.0, a_env=10.0, delta_phi=0.1)
    assert validate_adiabaticity(fast, g=0.013, omega_min=0.848).status == "fail"


def test_sample_grid():
    s = sample(PULSE, PULSE.duration / 2)
    assert len(s.times) == 3
    assert s.values[0] == math.pi and s.values[-1] == math.pi
    assert s.times[-1] == PULSE.duration
    with pytest.raises(ValueError):
        sample(PULSE, 2 * PULSE.duration)
    with pytest.raises(ValueError):
        sample(PULSE, 0.0)
    # uneven duration: last step shortened to land on the end time
    s = sample(PULSE, 0.7)
    assert s.times[-1] == PULSE.duration
    assert np.all(np.diff(s.times) <= 0.7 + 1e-12)


def test_sampled_area_self_convergence():
    def area(dt):
        s = sample(PULSE, dt)
        return np.trapezoid(s.values - math.pi, s.times)

    coarse, mid, fine = area(0.02), area(0.01), area(0.005)
    assert abs(mid - fine) <= abs(coarse - mid)
    assert abs(mid - fine) / abs(fine) < 1e-6
