import numpy as np
import pytest

from ldacs_sync import energy_template, generate_preamble, make_numerology


@pytest.fixture(scope="session")
def num():
    return make_numerology()


@pytest.fixture(scope="session")
def pre(num):
    return generate_preamble(num, seed=1)


@pytest.fixture(scope="session")
def template(num, pre):
    return energy_template(pre, num)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
