import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dhtbound import AuxiliaryReceiver, DiscreteScenario  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


def bsc(e):
    return np.array([[1 - e, e], [e, 1 - e]])


def random_kernel(rng, n_in, n_out, alpha=1.0):
    return rng.dirichlet(np.full(n_out, alpha), n_in)


def in_r_instance(rng, nx=2, ny=2, nz=2, rate=0.3):
    """Random scenario with a receiver in R.

    Q_XYZ = Q_X Q_{Z|X} Q_{Y|Z}; P_XZ = Q_XZ with an arbitrary P_{Y|XZ}.
    """
    qx = rng.dirichlet(np.ones(nx))
    qzx = random_kernel(rng, nx, nz)
    qyz = random_kernel(rng, nz, ny)
    qxyz = qx[:, None, None] * qzx[:, None, :] * qyz.T[None]
    pxz = qx[:, None] * qzx
    py_xz = random_kernel(rng, nx * nz, ny).reshape(nx, nz, ny)
    pxyz = pxz[:, None, :] * py_xz.transpose(0, 2, 1)
    qxy, pxy = qxyz.sum(2), pxyz.sum(2)
    aux = AuxiliaryReceiver(
        (pxyz / pxy[:, :, None]).reshape(nx * ny, nz),
        (qxyz / qxy[:, :, None]).reshape(nx * ny, nz),
    )
    return DiscreteScenario(pxy, qxy, rate), aux


@pytest.fixture
def binary_scenario():
    """X uniform; Y = BSC(0.1)(X) under P, BSC(0.2)(X) under Q; rate 0.2 nats."""
    px = np.array([0.5, 0.5])
    return DiscreteScenario(px[:, None] * bsc(0.1), px[:, None] * bsc(0.2), 0.2)
