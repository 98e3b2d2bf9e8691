import time

import numpy as np
import pytest

from vqoe.features import load_dataset
from vqoe.synth import build_corpus
from vqoe.video_io import frames_from_arrays


def make_frames(y, u=None, v=None):
    """Frames from a (T, H, W) luma stack; chroma defaults to flat 128."""
    y = np.ascontiguousarray(y, dtype=np.uint8)
    t, h, w = y.shape
    if u is None:
        u = np.full((t, (h + 1) // 2, (w + 1) // 2), 128, np.uint8)
    if v is None:
        v = u.copy()
    return frames_from_arrays(y, u, v)


PIPELINE_SECONDS = {}


@pytest.fixture(scope="session")
def acceptance_corpus(tmp_path_factory):
    """The 300-clip, seed-7 synthetic corpus shared by the corpus-level tests.

    Build and extraction wall times are recorded in ``PIPELINE_SECONDS`` so
    the end-to-end runtime check can include them.
    """
    t0 = time.perf_counter()
    corpus = build_corpus(300, 7, tmp_path_factory.mktemp("corpus300"))
    PIPELINE_SECONDS["build"] = time.perf_counter() - t0
    return corpus


@pytest.fixture(scope="session")
def acceptance_samples(acceptance_corpus):
    t0 = time.perf_counter()
    samples = load_dataset(acceptance_corpus.manifest_path)
    PIPELINE_SECONDS["extract"] = time.perf_counter() - t0
    return samples
