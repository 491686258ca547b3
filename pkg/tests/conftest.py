import json

import numpy as np
import pytest

from geodistort import distortion as dd
from geodistort import geodesic as gd
from geodistort import metric as mc


@pytest.fixture(scope="session")
def sphere():
    return mc.sphere_projection()


@pytest.fixture(scope="session")
def sphere_frame(sphere):
    return gd.normal_frame(sphere, (0.0, 0.0))


@pytest.fixture(scope="session")
def sphere_profile(sphere):
    return dd.distortion_profile(sphere)


@pytest.fixture(scope="session")
def sphere_chart_length(sphere):
    return dd.chart_length_profile(sphere)


@pytest.fixture(scope="session")
def hyperbolic():
    return mc.warped("sinh", 3.0)


@pytest.fixture(scope="session")
def hyperbolic_profile(hyperbolic):
    return dd.distortion_profile(hyperbolic)


@pytest.fixture(scope="session")
def full_sphere():
    return mc.warped("sin", np.pi)


@pytest.fixture(scope="session")
def full_sphere_profile(full_sphere):
    return dd.distortion_profile(full_sphere)


@pytest.fixture
def spec_file(tmp_path):
    def write(spec, name="spec.json"):
        path = tmp_path / name
        path.write_text(json.dumps(spec))
        return str(path)

    return write
