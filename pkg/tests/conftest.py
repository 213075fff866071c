import numpy as np
import pytest

from rda_bench.audio_io import SynthSpec, synthesize_dataset


@pytest.fixture(scope="session")
def small_corpus():
    """3 subjects x 4 clips; enough for split/evaluation tests."""
    spec = SynthSpec(seed=42, subjects=3, clips_per_subject=4)
    manifest, records = synthesize_dataset(spec)
    return manifest, records


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def make_tone(freq, fs=8000, n=320, amplitude=0.5):
    t = np.arange(n) / fs
    return amplitude * np.sin(2 * np.pi * freq * t)
