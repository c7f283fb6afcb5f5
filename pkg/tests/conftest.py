from random import Random

import pytest

from trustmark import ars
from trustmark.crs import derive_params_deterministic


@pytest.fixture(scope="session")
def pp():
    return derive_params_deterministic(4, 2)


@pytest.fixture(scope="session")
def world(pp):
    """16 admitters, a ring over all of them and three auditors."""
    rng = Random(7)
    admitters = [ars.ukgen(pp, rng) for _ in range(pp.N)]
    auditors = [ars.okgen(pp, rng) for _ in range(3)]
    ring = ars.Ring(tuple(a.pk for a in admitters))
    return admitters, auditors, ring


@pytest.fixture
def rng():
    return Random(1234)
