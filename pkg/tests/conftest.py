import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from splincal import kernels


@pytest.fixture(params=["numpy", "numba"])
def backend(request):
    previous = kernels.backend_name()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)


FIXTURES = Path(__file__).parent / "fixtures"
