import math

import numpy as np
import pytest

from defectlaser import (MechanicalParams, OpticalParams, SystemParams,
                         TlsParams)

OMEGA_M = 2.0 * math.pi * 23.4e6
GAMMA = 6.43e6
GAMMA_M = 0.24e6


def make_params(pump_power=10e-6, pump_detuning=0.5 * OMEGA_M,
                coupling_j=0.5 * OMEGA_M, gamma=GAMMA, gamma_m=GAMMA_M,
                g_d=1e6, gamma_q=GAMMA, omega_q=OMEGA_M, omega_m=OMEGA_M,
                mass=50e-12, radius=34.5e-6,
                cavity_freq=2.0 * math.pi * 193e12) -> SystemParams:
    """Experimentally accessible base point used across the suite."""
    return SystemParams(
        optical=OpticalParams(cavity_freq=cavity_freq, cavity_loss=gamma,
                              coupling=coupling_j, radius=radius,
                              pump_power=pump_power,
                              pump_detuning=pump_detuning),
        mechanical=MechanicalParams(mech_freq=omega_m, mech_loss=gamma_m,
                                    eff_mass=mass),
        tls=TlsParams(tls_freq=omega_q, tls_loss=gamma_q, coupling=g_d),
    )


@pytest.fixture
def fig2_params() -> SystemParams:
    return make_params()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260809)


def random_params(rng: np.random.Generator, g_d=None) -> SystemParams:
    """Random valid parameter set in a broad physical range."""
    omega_m = 2.0 * math.pi * rng.uniform(5e6, 80e6)
    return make_params(
        pump_power=rng.uniform(0.0, 20e-6),
        pump_detuning=rng.uniform(-1.0, 1.0) * omega_m,
        coupling_j=rng.uniform(0.2, 0.8) * omega_m,
        gamma=rng.uniform(1e6, 2e7),
        gamma_m=rng.uniform(1e4, 5e5),
        g_d=rng.uniform(0.0, 3e6) if g_d is None else g_d,
        gamma_q=rng.uniform(1e5, 2e7),
        omega_q=rng.uniform(0.8, 1.2) * omega_m,
        omega_m=omega_m,
        mass=rng.uniform(1e-12, 1e-10),
        radius=rng.uniform(10e-6, 100e-6),
    )
