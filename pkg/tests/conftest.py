import pytest

from tsgronwall.gridfun import Domain3, GridFunction3
from tsgronwall.timescale import TimeScale


@pytest.fixture
def worked():
    """t1 = t2 = {0, 1, 2}, i = {0, 1}: the 3 x 3 x 2 grid of the hand-worked examples."""
    t = TimeScale.integers(0, 2)
    return Domain3(t, t, TimeScale.integers(0, 1))


@pytest.fixture
def ones(worked):
    return GridFunction3(worked, 1.0)
