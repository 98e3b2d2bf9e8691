import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqoe import synth
from vqoe.errors import DimensionMismatch, EmptyClip
from vqoe.temporal import DecimateThresholds, detect_freezes, duplicate_runs, is_duplicate
from vqoe.video_io import ClipMeta

from conftest import make_frames
from oracles import naive_is_duplicate


def random_pair(rng, h, w):
    a = rng.integers(0, 256, (h, w), dtype=np.uint8)
    b = a.copy()
    mode = rng.integers(0, 4)
    if mode == 0:
        b = rng.integers(0, 256, (h, w), dtype=np.uint8)
    elif mode >= 1:
        # sparse small perturbations so all outcomes occur
        n = rng.integers(0, h * w // 2 + 1)
        ys, xs = rng.integers(0, h, n), rng.integers(0, w, n)
        delta = rng.integers(-25, 26, n) if mode == 1 else rng.integers(-8, 9, n)
        b[ys, xs] = np.clip(b[ys, xs].astype(int) + delta, 0, 255)
    return a, b


def _pair_frames(a, b):
    fr = make_frames(np.stack([a, b]))
    return fr[0], fr[1]


def test_thresholds_defaults():
    th = DecimateThresholds()
    assert (th.hi, th.lo, th.frac) == (768, 320, 0.1)
    with pytest.raises(ValueError):
        DecimateThresholds(hi=100, lo=200)


def test_identical_frames_are_duplicates():
    f = make_frames(np.random.default_rng(0).integers(0, 256, (1, 32, 32)))[0]
    assert is_duplicate(f, f)


def test_one_block_over_hi():
    a = np.full((32, 32), 100, np.uint8)
    b = a.copy()
    b[8:16, 16:24] += 13  # block SAD 64 * 13 = 832 > 768
    assert not is_duplicate(*_pair_frames(a, b))
    b[8:16, 16:24] = 112  # 64 * 12 = 768, not above hi
    assert is_duplicate(*_pair_frames(a, b))


def test_lo_fraction_rule():
    # 20 x 8 = 160 blocks; 8 of them (5%) change by +6 per pixel (SAD 384)
    a = np.full((64, 160), 90, np.uint8)
    b = a.copy()
    for i in range(8):
        b[0:8, i * 8 : i * 8 + 8] += 6
    assert is_duplicate(*_pair_frames(a, b))
    # 17 blocks = 10.6% > frac
    for i in range(17):
        b[8:16, i * 8 : i * 8 + 8] += 6
    assert not is_duplicate(*_pair_frames(a, b))


def test_dimension_mismatch():
    a = make_frames(np.zeros((1, 16, 16)))[0]
    b = make_frames(np.zeros((1, 16, 24)))[0]
    with pytest.raises(DimensionMismatch):
        is_duplicate(a, b)


def test_matches_naive_oracle_seeded():
    rng = np.random.default_rng(2024)
    outcomes = set()
    for _ in range(150):
        h, w = (int(rng.integers(8, 41)) // 2 * 2 for _ in range(2))
        a, b = random_pair(rng, max(h, 8), max(w, 8))
        got = is_duplicate(*_pair_frames(a, b))
        assert got == naive_is_duplicate(a, b)
        outcomes.add(got)
    assert outcomes == {True, False}


@settings(max_examples=60, deadline=None)
@given(
    st.integers(8, 40), st.integers(8, 40), st.integers(0, 2**32 - 1),
    st.integers(0, 2000), st.integers(0, 2000), st.floats(0, 1),
)
def test_matches_naive_oracle_any_thresholds(h, w, seed, t1, t2, frac):
    lo, hi = sorted((t1, t2))
    rng = np.random.default_rng(seed)
    a, b = random_pair(rng, h // 2 * 2, w // 2 * 2)
    got = is_duplicate(*_pair_frames(a, b), DecimateThresholds(hi, lo, frac))
    assert got == naive_is_duplicate(a, b, hi, lo, frac)


def test_duplicate_runs():
    m = np.array([0, 1, 1, 0, 1, 0, 0, 1, 1, 1], bool)
    assert duplicate_runs(m) == [(1, 2), (4, 4), (7, 9)]
    assert duplicate_runs(np.zeros(4, bool)) == []


def _clip(n, fps, spans, seed=1, velocity=3):
    # 64x64 at 3 px/frame: the wrapped translation repeats only every 64 frames
    meta = ClipMeta(64, 64, fps, n)
    frames = synth.generate_pristine("noise_texture", meta, seed=seed, velocity=velocity)
    return synth.apply_degradation(frames, synth.DegradationSpec(0, spans)), meta


def test_two_second_freeze_at_30fps():
    frames, meta = _clip(300, 30, [(30, 60)])
    r = detect_freezes(frames, meta)
    assert r.num_freezes == 1
    e = r.events[0]
    assert (e.start_frame, e.end_frame) == (31, 90)
    assert e.duration_seconds == 2.0
    assert r.freeze_ratio == 60 / 300
    assert r.total_freeze_seconds == 2.0


def test_short_runs_count_in_ratio_only():
    # 30 duplicates at 30 fps is exactly one second: not a freeze event
    frames, meta = _clip(200, 30, [(10, 30), (100, 31), (150, 5)])
    r = detect_freezes(frames, meta)
    assert r.freeze_ratio == 66 / 200
    assert [(e.start_frame, e.end_frame) for e in r.events] == [(101, 131)]
    assert r.total_freeze_seconds == pytest.approx(31 / 30)


def test_no_duplicates():
    frames, meta = _clip(40, 30, [])
    r = detect_freezes(frames, meta)
    assert (r.freeze_ratio, r.num_freezes, r.total_freeze_seconds, r.events) == (0.0, 0, 0.0, [])
    assert not r.still_clip_warning


def test_all_duplicates_still_clip():
    frames = make_frames(np.full((50, 16, 16), 30))
    r = detect_freezes(frames, ClipMeta(16, 16, 30, 50))
    assert r.freeze_ratio == 49 / 50
    assert r.num_freezes == 1
    assert r.still_clip_warning


def test_too_short_clip():
    with pytest.raises(EmptyClip):
        detect_freezes(make_frames(np.zeros((1, 8, 8))), ClipMeta(8, 8, 30, 1))


def test_freeze_ratio_monotone_in_freeze_length():
    ratios = []
    for length in (0, 5, 20, 40, 70, 99):
        spans = [(0, length)] if length else []
        frames, meta = _clip(100, 25, spans)
        ratios.append(detect_freezes(frames, meta).freeze_ratio)
    assert ratios == sorted(ratios)
    assert ratios[-1] == 0.99
