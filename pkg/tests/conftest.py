import pytest

from wmwpower import _backend

BACKENDS = ["python"] + (["compiled"] if _backend.compiled is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return _backend.get(request.param)
