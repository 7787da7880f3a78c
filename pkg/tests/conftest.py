import numpy as np
import pytest

from vortexcorr import VortexConfiguration


def random_configuration(rng, n, box=2.5, min_sep=0.4) -> VortexConfiguration:
    """Well-separated random configuration with |d| in [0.5, 2]."""
    while True:
        pts = rng.uniform(-box, box, size=(n, 2))
        zs = pts[:, 0] + 1j * pts[:, 1]
        if all(abs(zs[i] - zs[j]) > min_sep for i in range(n) for j in range(i + 1, n)):
            break
    ds = rng.uniform(0.5, 2.0, size=n) * rng.choice([-1.0, 1.0], size=n)
    return VortexConfiguration.from_pairs(list(zip(zs, ds)))


def random_point_clear_of(rng, config, box=4.0, clearance=0.1) -> complex:
    """Random plane point keeping its distance from every vortex."""
    while True:
        z = complex(rng.uniform(-box, box), rng.uniform(-box, box))
        if min(abs(z - a) for a in config.positions) > clearance:
            return z


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
