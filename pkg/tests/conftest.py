import numpy as np
import pytest

from slipmeter.ingest import AlignedDataset
from slipmeter.kinematics import VehicleSpec
from slipmeter.metrics import DistortionSeries, series_from_slip


@pytest.fixture
def testbot():
    """Vehicle used throughout the numeric examples: r=0.3 m, b=1.2 m."""
    return VehicleSpec("testbot", mass=100.0, v_max=2.0, wheel_radius=0.3, track_width=1.2)


def constant_dataset(spec, omega_l, omega_r, vx, vy, omega, n=20, dt=0.05, name="const"):
    """Aligned dataset with constant command and observed velocity."""
    t = np.arange(n) * dt
    ones = np.ones(n)
    return AlignedDataset(
        name, spec, "asphalt", dt, t, omega_l * ones, omega_r * ones, vx * ones, vy * ones, omega * ones
    )


def series_from_moduli(moduli, name="series", dt=0.05):
    """Distortion series whose moduli equal the given non-negative values."""
    moduli = np.asarray(moduli, dtype=float)
    assert np.all(moduli >= 0)
    t = np.arange(moduli.size) * dt
    zeros = np.zeros_like(moduli)
    return series_from_slip(name, t, moduli, zeros, zeros, 1.0)


def assert_series_consistent(series: DistortionSeries):
    gw = series.angular_weight * series.gomega
    expected = np.sqrt(series.gx * series.gx + series.gy * series.gy + gw * gw)
    np.testing.assert_array_equal(series.modulus, expected)
