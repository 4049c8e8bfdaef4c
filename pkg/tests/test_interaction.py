import pytest

from errors import InvalidInputError
from interaction import HandleWrench, VelocityCommand, clamp_omega


def test_wrench_keeps_components():
    w = HandleWrench(5.0, -1.5)
    assert (w.f_x, w.tau_z) == (5.0, -1.5)


@pytest.mark.parametrize("f_x, tau_z", [(float("nan"), 0.0), (0.0, float("inf"))])
def test_non_finite_wrench_is_rejected(f_x, tau_z):
    with pytest.raises(InvalidInputError):
        HandleWrench(f_x, tau_z)


def test_command_within_steering_limit():
    assert VelocityCommand(0.5, -90.0).omega == -90.0


def test_command_beyond_steering_limit_is_rejected():
    with pytest.raises(InvalidInputError, match="steering limit"):
        VelocityCommand(0.5, 120.0)


@pytest.mark.parametrize("omega, expected", [(120.0, 90.0), (-95.0, -90.0), (12.5, 12.5)])
def test_clamp_omega(omega, expected):
    assert clamp_omega(omega) == expected
