import pytest

from abiot_sim import default_config
from abiot_sim import _kernels


@pytest.fixture
def cfg():
    return default_config()


@pytest.fixture
def field(cfg):
    return cfg.field


BACKENDS = [pytest.param(_kernels.python_backend, id="python")]
if _kernels.compiled_backend is not None:
    BACKENDS.append(pytest.param(_kernels.compiled_backend, id="cython"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param
