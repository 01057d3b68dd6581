import numpy as np
import pytest

from pointersim.model import MeasurementConfig, gaussian_state_moments


@pytest.fixture(scope="session")
def open_config() -> MeasurementConfig:
    """Reference open-measurement parameter set used throughout."""
    return MeasurementConfig(
        kappa1=2.0, kappa2=2.0, mass_ratio=1.0, eta=0.25, omega_c=20.0, inv_beta=1.0
    )


@pytest.fixture(scope="session")
def closed_config() -> MeasurementConfig:
    return MeasurementConfig(
        kappa1=2.0, kappa2=2.0, mass_ratio=1.0, eta=0.0, omega_c=20.0, inv_beta=1.0
    )


@pytest.fixture(scope="session")
def default_moments():
    return gaussian_state_moments()


@pytest.fixture(scope="session")
def time_grid_200() -> np.ndarray:
    return np.linspace(0.02, 3.0, 200)
