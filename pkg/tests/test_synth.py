import csv
import filecmp
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vqoe import synth
from vqoe.errors import OverlappingSpans, SpanOutOfBounds
from vqoe.spatial import intra_encode_size
from vqoe.temporal import detect_freezes, is_duplicate
from vqoe.video_io import ClipMeta


META = ClipMeta(64, 64, 30, 60)


def test_gradient_changes():
    frames = synth.generate_pristine("gradient", META)
    assert frames[0] != frames[-1]


@pytest.mark.parametrize("kind", synth.KINDS)
def test_consecutive_frames_never_duplicates(kind):
    frames = synth.generate_pristine(kind, META, seed=3)
    assert not any(is_duplicate(a, b) for a, b in zip(frames, frames[1:]))


def test_moving_checker_histograms_match_across_velocities():
    slow = synth.generate_pristine("moving_checker", META, seed=8, velocity=1)
    fast = synth.generate_pristine("moving_checker", META, seed=8, velocity=4)
    ref = np.bincount(slow[0].y.ravel(), minlength=256)
    for a, b in zip(slow, fast):
        assert np.array_equal(np.bincount(a.y.ravel(), minlength=256), ref)
        assert np.array_equal(np.bincount(b.y.ravel(), minlength=256), ref)


def test_noise_texture_seeded():
    a = synth.generate_pristine("noise_texture", META, seed=5)
    b = synth.generate_pristine("noise_texture", META, seed=5)
    c = synth.generate_pristine("noise_texture", META, seed=6)
    assert a == b
    assert a != c


def test_unknown_kind():
    with pytest.raises(ValueError):
        synth.generate_pristine("fireworks", META)


def test_identity_degradation():
    frames = synth.generate_pristine("talking_head_proxy", META)
    assert synth.apply_degradation(frames, synth.DegradationSpec()) == frames


def test_span_becomes_two_second_event():
    frames = synth.generate_pristine("noise_texture", ClipMeta(64, 64, 30, 120), seed=2, velocity=2)
    out = synth.apply_degradation(frames, synth.DegradationSpec(0, [(30, 60)]))
    assert all(out[i] == frames[30] for i in range(31, 91))
    assert out[91] == frames[91]
    r = detect_freezes(out, ClipMeta(64, 64, 30, 120))
    assert r.num_freezes == 1 and r.events[0].duration_seconds == 2.0


def test_heavy_blur_shrinks_noise_texture():
    frames = synth.generate_pristine("noise_texture", META, seed=4)
    blurred = synth.apply_degradation(frames, synth.DegradationSpec(5))
    assert intra_encode_size(blurred) < intra_encode_size(frames)


def test_gaussian_kernel():
    k = synth.gaussian_kernel(1.5)
    assert len(k) == 2 * 5 + 1  # radius ceil(4.5)
    assert k.sum() == pytest.approx(1.0)
    assert np.allclose(k, k[::-1])


def test_blur_preserves_flat_planes():
    p = np.full((2, 16, 16), 77, np.uint8)
    assert np.array_equal(synth.blur_planes(p, 3.0), p)


def test_spec_validation():
    with pytest.raises(OverlappingSpans):
        synth.DegradationSpec(0, [(0, 10), (10, 5)])
    synth.DegradationSpec(0, [(0, 10), (11, 5)])
    with pytest.raises(SpanOutOfBounds):
        synth.DegradationSpec(0, [(-1, 3)])
    frames = synth.generate_pristine("gradient", ClipMeta(64, 64, 30, 20))
    with pytest.raises(SpanOutOfBounds):
        synth.apply_degradation(frames, synth.DegradationSpec(0, [(10, 10)]))
    # spans are kept sorted
    assert synth.DegradationSpec(0, [(20, 2), (1, 3)]).freeze_spans == ((1, 3), (20, 2))


def test_synthetic_mos_formula():
    assert synth.synthetic_mos(synth.DegradationSpec(), 100) == 5.0
    assert synth.synthetic_mos(synth.DegradationSpec(2.5), 100) == 3.5
    assert synth.synthetic_mos(synth.DegradationSpec(0, [(0, 40)]), 100) == 4.0
    assert synth.synthetic_mos(synth.DegradationSpec(10, [(0, 90)]), 100) == 1.0


@given(st.floats(0, 8), st.floats(0, 8), st.integers(0, 99), st.integers(0, 99))
def test_synthetic_mos_monotone(s1, s2, f1, f2):
    def mos(s, f):
        return synth.synthetic_mos(synth.DegradationSpec(s, [(0, f)] if f else []), 100)

    if s1 <= s2 and f1 <= f2:
        assert mos(s1, f1) >= mos(s2, f2)
    assert 1.0 <= mos(s1, f1) <= 5.0


@pytest.mark.parametrize("seed", range(30))
def test_profile_presets(seed):
    rng = np.random.default_rng(seed)
    n, fps = 60, 10
    g = synth.sample_profile("good", n, fps, rng)
    assert g.blur_sigma == 0 and g.freeze_spans == ()
    a = synth.sample_profile("average", n, fps, rng)
    assert 1 <= a.blur_sigma <= 2 and a.frozen_frames() <= 0.2 * n
    b = synth.sample_profile("bad", n, fps, rng)
    assert 3 <= b.blur_sigma <= 5 and b.frozen_frames() >= 0.6 * n
    for spec in (a, b):
        spec.check_bounds(n)
        assert all(length > fps for _, length in spec.freeze_spans)


def test_corpus_is_deterministic(tmp_path):
    c1 = synth.build_corpus(12, 3, tmp_path / "a")
    c2 = synth.build_corpus(12, 3, tmp_path / "b")
    for rel in ["manifest.csv", "corpus.json"] + [c.path for c in c1.clips]:
        assert filecmp.cmp(os.path.join(c1.root, rel), os.path.join(c2.root, rel), shallow=False), rel


def test_corpus_minimum_size(tmp_path):
    with pytest.raises(ValueError):
        synth.build_corpus(9, 0, tmp_path)


def test_acceptance_corpus_layout(acceptance_corpus):
    with open(acceptance_corpus.manifest_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 300
    assert list(rows[0]) == ["clip_id", "path", "recorded_bitrate_bps", "mos"]
    assert [r["clip_id"] for r in rows] == sorted(r["clip_id"] for r in rows)
    meta = synth.load_corpus_metadata(acceptance_corpus.metadata_path)
    assert meta["seed"] == 7 and meta["generator_version"] == synth.GENERATOR_VERSION
    counts = {p: sum(c["profile"] == p for c in meta["clips"]) / 300 for p in ("bad", "average", "good")}
    assert abs(counts["bad"] - 0.3) <= 0.05
    assert abs(counts["average"] - 0.4) <= 0.05
    assert abs(counts["good"] - 0.3) <= 0.05
    for c in meta["clips"]:
        if c["profile"] == "good":
            assert c["mos"] == 5.0
