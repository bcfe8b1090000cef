import numpy as np
import pytest

from cdcr import kernels


@pytest.fixture(params=sorted(kernels.backends()))
def kernel_backend(request):
    """Run kernel-dependent tests against every available backend."""
    return kernels.backends()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
