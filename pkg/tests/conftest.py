import math

import numpy as np
import pytest
from hypothesis import settings

from qbdrive.algebra import build_gellmann_basis
from qbdrive.experiment import spin1_protocol

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

OMEGA = math.pi / 20


@pytest.fixture(scope="session")
def su3():
    return build_gellmann_basis(3)


@pytest.fixture(scope="session")
def spin1():
    return spin1_protocol(1.0, OMEGA)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, n, scale=1.0):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (A + A.conj().T)
