import numpy as np
import pytest

from dfam.dataset import load_dataset
from dfam.signal import TimeSeries
from dfam.synth import gen_synth


def make_stream(axes, hz=50.0, device="phone", sensor="accelerometer"):
    axes = np.asarray(axes, dtype=np.float64)
    if axes.ndim == 1:
        axes = np.column_stack([axes, axes, axes])
    t_ms = np.round(np.arange(axes.shape[0]) * 1000.0 / hz).astype(np.int64)
    return TimeSeries(device, sensor, hz, t_ms, axes)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Six activities, two subjects, 20 s each; no jitter."""
    root = tmp_path_factory.mktemp("corpus")
    gen_synth(root, activities=6, subjects=2, duration_s=20.0, noise=0.25, seed=5)
    return root


@pytest.fixture(scope="session")
def small_dataset(small_corpus):
    return load_dataset(small_corpus)
