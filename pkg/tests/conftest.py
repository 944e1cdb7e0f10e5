import numpy as np
import pytest

from eegid.io_ingest import EegRecording


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_recording(data, fs=128.0, subject="S000", dataset="test",
                   condition="resting", names=None):
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if names is None:
        names = tuple(f"CH{i:02d}" for i in range(data.shape[0]))
    return EegRecording(
        channel_names=tuple(names),
        sampling_rate_hz=fs,
        data=data,
        subject_id=subject,
        dataset_id=dataset,
        condition=condition,
    )
