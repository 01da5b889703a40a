""" Shared fixtures """


# global imports
import pytest

# local imports
from src.backend.oracle import worked_example
from helpers import seeded_instance


@pytest.fixture
def worked():
    return worked_example()


@pytest.fixture
def small_instance():
    return seeded_instance(7, num_nodes=4, antennas=2, subchannels=2)
