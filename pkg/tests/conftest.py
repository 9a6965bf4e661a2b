import pytest

from gkheat import MaterialParams, SimulationConfig


@pytest.fixture(scope="session")
def ref_params() -> MaterialParams:
    """Reference conductor: the configuration all derived values are frozen for."""
    return MaterialParams(rho=2e3, c=5e2, tau_q=8e-3, mu2=2.8e-3, k=2e3, l=0.1)


@pytest.fixture(scope="session")
def ref_config() -> SimulationConfig:
    return SimulationConfig(dx=2e-4, dt=1.2e-2, t_final=30.0, T_b=15.0, T_f=30.0)
