import numpy as np
import pytest

from dlamf.scenario import (LowRankClutter, Scenario, ToeplitzClutter)

LOWRANK_ANGLES = (0.0, 5.0, 5.0, 10.0, 25.0, 25.0, 30.0, 30.0, 60.0)


def toeplitz_scenario(N, K, rho=0.95, theta=20.0, clutter_power=10.0,
                      noise=1.0):
    return Scenario(N=N, K=K, clutter=ToeplitzClutter(clutter_power, rho),
                    noise_power=noise, steering_deg=theta)


def lowrank_scenario(N, K, theta=20.0):
    return Scenario(N=N, K=K,
                    clutter=LowRankClutter(LOWRANK_ANGLES, (10.0,) * 9),
                    noise_power=1.0, steering_deg=theta)


@pytest.fixture(scope="session")
def scen_n24_k48():
    return toeplitz_scenario(24, 48)


@pytest.fixture(scope="session")
def scen_n12_k48_t20():
    return toeplitz_scenario(12, 48, theta=20.0)


@pytest.fixture(scope="session")
def scen_n12_k48_t5():
    return toeplitz_scenario(12, 48, theta=5.0)


@pytest.fixture(scope="session")
def scen_n12_k13_t5():
    return toeplitz_scenario(12, 13, theta=5.0)


def random_spd(N, rng, spread=3.0):
    """Random Hermitian positive definite matrix with a spread spectrum."""
    A = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    Q, _ = np.linalg.qr(A)
    eig = np.exp(rng.uniform(-spread / 2, spread / 2, N))
    return (Q * eig) @ Q.conj().T


def random_steering(N, rng):
    v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    return v / np.linalg.norm(v)
