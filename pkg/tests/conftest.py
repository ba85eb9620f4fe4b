import numpy as np
import pytest

from hypwave.geom import DependenceConfig
from hypwave.hypcore import HPoint

# Frozen oracle values for p=2, q=1, rho=0.1 (30-digit acosh evaluation).
THETA_I = 3.39673804324669519
THETA_ISTAR = 2.70693350082886286
PHI_I = 0.689804542417832330
U1_ANCHOR = 12.2073430881511161          # 2 (theta_i + theta_i*)
MEAN_X_RHO01 = 1.43914242135297792       # 1 + rho sinh(theta_i) / theta_i
KERNEL_HALF_RHO01 = 6.10367154407555805  # int_0^phi_i kernel


@pytest.fixture
def cfg_axis():
    return DependenceConfig.build(HPoint(1.0, 0.0), 2.0)


@pytest.fixture
def cfg_main():
    return DependenceConfig.build(HPoint(1.25, 0.75), 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_cfg(rng, p_range=(0.5, 5.0), q_frac=(0.05, 0.95), alpha_max=1.5):
    p = rng.uniform(*p_range)
    q = p * rng.uniform(*q_frac)
    a = rng.uniform(-alpha_max, alpha_max)
    return DependenceConfig.build(HPoint(q * np.cosh(a), q * np.sinh(a)), p)
