import pathlib

import pytest


@pytest.fixture(scope="session")
def goldens_dir() -> pathlib.Path:
    return pathlib.Path(__file__).parent / "goldens"
