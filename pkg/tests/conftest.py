"""Shared fixtures for the test suite.

The built-in families are frozen dataclasses, so session scope is safe.
scipy is used in tests only, as an independent oracle for kernels that
this package implements itself.
"""

import numpy as np
import pytest

from evanskit import model


@pytest.fixture
def rng():
    return np.random.default_rng(8675309)


@pytest.fixture(scope="session")
def rotating_fam():
    return model.rotating_pair_family()


@pytest.fixture(scope="session")
def mobius_fam():
    return model.mobius_circle_family()


@pytest.fixture(scope="session")
def teller_fam():
    return model.poschl_teller_family()
