import numpy as np
import pytest

from sentinel.detector import Frame


def make_frame(width, height, values, t=0.0):
    """Frame from a flat list (or scalar fill) of luminance values."""
    if isinstance(values, int):
        values = [values] * (width * height)
    return Frame(width=width, height=height, pixels=np.asarray(values), captured_at=t)


@pytest.fixture
def frame_factory():
    return make_frame
