import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stratawave.model import FluidParams

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def p_default() -> FluidParams:
    return FluidParams(rho=1.0, rho_bar=0.9, g=9.8, sigma=0.0,
                       omega=1.0, omega_bar=0.5)


@pytest.fixture(scope="session")
def param_grid() -> list[FluidParams]:
    """A deterministic spread of stably stratified parameter sets."""
    rng = np.random.default_rng(7)
    sets = []
    while len(sets) < 5:
        rho_bar = float(rng.uniform(0.4, 1.6))
        rho = rho_bar + float(rng.uniform(0.15, 1.5))
        sets.append(FluidParams(
            rho=rho, rho_bar=rho_bar, g=9.8,
            sigma=float(rng.uniform(0.0, 0.4)),
            omega=float(rng.uniform(-1.2, 1.2)),
            omega_bar=float(rng.uniform(-1.2, 1.2)),
        ))
    return sets
