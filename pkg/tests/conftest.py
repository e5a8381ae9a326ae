import numpy as np
import pytest

from periodic_spectra import (
    make_cone,
    make_counterexample,
    make_g11,
    make_g21,
    make_half_plane,
    make_lattice,
    make_random_pendant,
)


@pytest.fixture(scope="session")
def lattice1():
    return make_lattice(1)


@pytest.fixture(scope="session")
def lattice2():
    return make_lattice(2)


@pytest.fixture(scope="session")
def g11():
    return make_g11()


@pytest.fixture(scope="session")
def g21():
    return make_g21()


@pytest.fixture(scope="session")
def cone():
    return make_cone()


@pytest.fixture(scope="session")
def half_plane():
    return make_half_plane()


@pytest.fixture(scope="session")
def counterexample():
    return make_counterexample()


@pytest.fixture(scope="session")
def random_pendant_half():
    return make_random_pendant(0.5, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(20240808)


@pytest.fixture
def announce(capfd):
    """Print a line that survives pytest's output capture."""

    def _announce(line: str) -> None:
        with capfd.disabled():
            print(line)

    return _announce
