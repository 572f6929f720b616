import numpy as np
import pytest

from eventdiv.events import EventBatch, EventStream, SensorGeometry


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_stream(x, y, t, p=None, width=8, height=8):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if p is None:
        p = np.ones(len(t), dtype=np.int8)
    return EventStream(x, y, t, np.asarray(p, dtype=np.int8), SensorGeometry(width, height))


def random_batch(rng, width=64, height=64, n=500, tau=0.5):
    """Uniform random events over the sensor; no scene structure."""
    x = rng.uniform(0, width, n)
    y = rng.uniform(0, height, n)
    t = np.sort(rng.uniform(0, tau, n))
    return EventBatch(x, y, t, tau, SensorGeometry(width, height))
