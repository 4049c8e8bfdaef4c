from pathlib import Path

import pytest

from admittance import AngularAdmittanceParams, LinearAdmittanceParams
from fuzzy_controller import calibrate_profile
from pose_geometry import CameraIntrinsics
from profile_file import load_profile
from user_model import USER5_ANGLE_MEANS, UserModelParams, calibrated_profile

ROOT = Path(__file__).parent


@pytest.fixture
def camera():
    return CameraIntrinsics(f_x=500.0, f_y=500.0, c_x=320.0, c_y=240.0)


@pytest.fixture(scope="session")
def user5_profile():
    return calibrate_profile(USER5_ANGLE_MEANS)


@pytest.fixture(scope="session")
def user_profile():
    """Profile calibrated to the default synthetic user, torque terms around its relaxed push."""
    return calibrated_profile(UserModelParams())


@pytest.fixture(scope="session")
def user5_profile_file():
    return load_profile(ROOT / "profiles" / "user5.profile")


@pytest.fixture
def linear_params():
    return LinearAdmittanceParams()


@pytest.fixture
def angular_params():
    return AngularAdmittanceParams()


@pytest.fixture
def user_params():
    return UserModelParams()


@pytest.fixture
def quiet_user():
    return UserModelParams().noiseless()
