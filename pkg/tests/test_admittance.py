import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import signal

from admittance import (AdmittanceState, AngularAdmittanceParams, ConventionalController,
                        LinearAdmittanceParams, SecondOrderState, angular_admittance_step,
                        conventional_tick, discretize, linear_admittance_step)
from errors import InvalidInputError
from interaction import HandleWrench

DT = 0.02

def run_linear(params, forces, dt=DT):
    state, out = SecondOrderState(dt=dt), []
    for f in forces:
        state, v = linear_admittance_step(state, params, f)
        out.append(v)
    return np.array(out)

def run_angular(params, torques, dt=DT):
    state, out = SecondOrderState(dt=dt), []
    for tau in torques:
        state, omega = angular_admittance_step(state, params, tau)
        out.append(omega)
    return np.array(out)

def continuous_step(m, b, k, t):
    """Closed-form unit-step response of (1/m) / (s^2 + (b/m)s + k/m)."""
    wn = math.sqrt(k / m)
    zeta = b / (2.0 * math.sqrt(k * m))
    if zeta < 1.0:
        wd = wn * math.sqrt(1.0 - zeta ** 2)
        shape = np.exp(-zeta * wn * t) * (np.cos(wd * t) + zeta / math.sqrt(1.0 - zeta ** 2) * np.sin(wd * t))
    elif zeta == 1.0:
        shape = (1.0 + wn * t) * np.exp(-wn * t)
    else:
        root = wn * math.sqrt(zeta ** 2 - 1.0)
        r1, r2 = -zeta * wn + root, -zeta * wn - root
        shape = (r1 * np.exp(r2 * t) - r2 * np.exp(r1 * t)) / (r1 - r2)
    return (1.0 - shape) / k

def test_zero_force_keeps_walker_still(linear_params):
    assert np.all(run_linear(linear_params, [0.0] * 200) == 0.0)

def test_force_equal_to_elasticity_settles_at_one_meter_per_second(linear_params):
    v = run_linear(linear_params, [linear_params.k_l] * 3000)
    assert v[-1] == pytest.approx(1.0, rel=1e-4)

def test_underdamped_step_matches_continuous_response():
    m, b, k = 1.0, 2.0, 4.0
    v = run_linear(LinearAdmittanceParams(m, b, k), [1.0] * 250)
    t = np.arange(250) * DT
    settled = t >= 0.2
    error = np.abs(v[settled] - continuous_step(m, b, k, t[settled]))
    assert error.max() <= 0.02 * (1.0 / k)

@pytest.mark.parametrize("zeta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("k", [1.0, 2.25, 4.0])
def test_step_response_fidelity(zeta, k):
    m = 1.0
    b = 2.0 * zeta * math.sqrt(k * m)
    n = 3000
    v = run_linear(LinearAdmittanceParams(m, b, k), [1.0] * n)
    t = np.arange(n) * DT
    assert np.max(np.abs(v - continuous_step(m, b, k, t))) <= 0.02 / k
    assert v[-1] == pytest.approx(1.0 / k, rel=0.005)

def test_angular_torque_equal_to_elasticity_settles_at_one_radian_per_second(angular_params):
    omega = run_angular(angular_params, [angular_params.k_a] * 2000)
    assert omega[-1] == pytest.approx(math.degrees(1.0), rel=1e-4)

def test_angular_output_saturates(angular_params):
    omega = run_angular(angular_params, [10 * angular_params.k_a] * 2000)
    assert omega[-1] == 90.0
    assert np.all(np.abs(omega) <= 90.0)

def test_zero_torque_gives_zero_turn_rate(angular_params):
    assert np.all(run_angular(angular_params, [0.0] * 100) == 0.0)

@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-50, max_value=50), st.floats(min_value=0.1, max_value=10.0))
def test_linear_channel_is_linear(force, alpha):
    params = LinearAdmittanceParams()
    base = run_linear(params, [force] * 100)
    scaled = run_linear(params, [alpha * force] * 100)
    assert scaled == pytest.approx(alpha * base, abs=1e-9)

@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.5, max_value=5), st.floats(min_value=0.0, max_value=10),
       st.floats(min_value=1.0, max_value=20), st.floats(min_value=-20, max_value=20))
def test_dc_gain_is_inverse_elasticity(m, b, k, force):
    params = LinearAdmittanceParams(m, b + 2.0 * math.sqrt(k * m), k)
    v = run_linear(params, [force] * 10000)
    assert v[-1] == pytest.approx(force / k, rel=0.005, abs=1e-9)

def test_discretization_preserves_dc_gain():
    ad, bd, cd, dd = discretize(10.0, 25.0, 10.0, DT)
    dc = cd @ np.linalg.solve(np.eye(2) - ad, bd) + dd
    assert dc == pytest.approx(0.1, rel=1e-12)

def test_discretization_matches_bilinear_transfer_function():
    ad, bd, cd, dd = discretize(1.0, 2.0, 4.0, DT)
    num, den = signal.ss2tf(ad, bd.reshape(2, 1), cd.reshape(1, 2), [[dd]])
    b, a = signal.bilinear([1.0], [1.0, 2.0, 4.0], fs=1.0 / DT)
    assert num[0] / den[0] == pytest.approx(b / a[0], abs=1e-12)
    assert den / den[0] == pytest.approx(a / a[0], abs=1e-12)

def test_released_filter_energy_never_grows():
    params = LinearAdmittanceParams(1.0, 2.0, 4.0)
    state = SecondOrderState(dt=DT)
    for _ in range(50):
        state, _ = linear_admittance_step(state, params, 1.0)
    norms = []
    for _ in range(200):
        state, _ = linear_admittance_step(state, params, 0.0)
        norms.append(state.norm(params))
    assert norms[0] > 0
    assert all(later <= earlier * (1 + 1e-12) for earlier, later in zip(norms, norms[1:]))

@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.5, max_value=10), st.floats(min_value=0.05, max_value=20),
       st.floats(min_value=0.5, max_value=50), st.floats(min_value=-30, max_value=30))
def test_zero_input_energy_is_non_increasing(m, b, k, torque):
    params = AngularAdmittanceParams(m, b, k)
    state = SecondOrderState(dt=DT)
    for _ in range(20):
        state, _ = angular_admittance_step(state, params, torque)
    previous = state.norm(params)
    for _ in range(100):
        state, _ = angular_admittance_step(state, params, 0.0)
        current = state.norm(params)
        assert current <= previous * (1 + 1e-12) + 1e-15
        previous = current

def test_conventional_tick_drives_channels_independently(linear_params, angular_params):
    state = AdmittanceState.at_rate(50)
    for _ in range(10):
        state, cmd = conventional_tick(state, HandleWrench(10.0, 0.0), linear_params, angular_params)
    assert cmd.v > 0 and cmd.omega == 0.0
    state = AdmittanceState.at_rate(50)
    for _ in range(10):
        state, cmd = conventional_tick(state, HandleWrench(0.0, 3.0), linear_params, angular_params)
    assert cmd.v == 0.0 and cmd.omega > 0

def test_controller_positive_torque_turns_left():
    controller = ConventionalController()
    for _ in range(100):
        cmd = controller.tick(HandleWrench(5.0, 2.0))
    assert cmd.omega > 0

def test_non_finite_force_is_rejected(linear_params):
    with pytest.raises(InvalidInputError, match="invalid input"):
        linear_admittance_step(SecondOrderState(), linear_params, float("nan"))

def test_non_positive_tick_is_rejected(linear_params):
    with pytest.raises(InvalidInputError):
        linear_admittance_step(SecondOrderState(dt=0.0), linear_params, 1.0)

@pytest.mark.parametrize("kwargs", [{"m": 0.0}, {"b_l": -1.0}, {"k_l": 0.0}])
def test_linear_parameters_are_validated(kwargs):
    with pytest.raises(InvalidInputError):
        LinearAdmittanceParams(**kwargs)

@pytest.mark.parametrize("kwargs", [{"J": -5.0}, {"b_a": -0.1}, {"k_a": 0.0}])
def test_angular_parameters_are_validated(kwargs):
    with pytest.raises(InvalidInputError):
        AngularAdmittanceParams(**kwargs)
