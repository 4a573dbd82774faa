import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ispo.fixtures import cough_store, taxonomy_store


@pytest.fixture
def taxonomy():
    return taxonomy_store()


@pytest.fixture
def cough():
    return cough_store()
