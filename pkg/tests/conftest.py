import pytest

from helpers import BATCH, example_param


@pytest.fixture
def param():
    return example_param()


@pytest.fixture
def batch():
    return list(BATCH)
